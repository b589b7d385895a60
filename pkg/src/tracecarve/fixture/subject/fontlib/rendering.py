from enum import Enum


class RenderingMode(Enum):
    FILL = 0
    STROKE = 1
    FILL_STROKE = 2
    NEITHER = 3
    FILL_CLIP = 4
    STROKE_CLIP = 5
    FILL_STROKE_CLIP = 6
    NEITHER_CLIP = 7

    def is_fill(self) -> bool:
        return self in (RenderingMode.FILL, RenderingMode.FILL_STROKE,
                        RenderingMode.FILL_CLIP, RenderingMode.FILL_STROKE_CLIP)

    def is_stroke(self) -> bool:
        return self in (RenderingMode.STROKE, RenderingMode.FILL_STROKE,
                        RenderingMode.STROKE_CLIP, RenderingMode.FILL_STROKE_CLIP)

from __future__ import annotations


class LineItem:
    # no __eq__: two equal-looking items compare by identity
    def __init__(self, sku: str, quantity: int, unit_price: float) -> None:
        self.sku = sku
        self.quantity = quantity
        self.unit_price = unit_price


class Cart:
    def __init__(self, owner: str) -> None:
        self.owner = owner
        self.items: list[LineItem] = []

    def add_item(self, sku: str, quantity: int, unit_price: float) -> int:
        for item in self.items:
            if item.sku == sku:
                item.quantity += quantity
                break
        else:
            self.items.append(LineItem(sku, quantity, unit_price))
        return sum(item.quantity for item in self.items)

    def item_count(self) -> int:
        return sum(item.quantity for item in self.items)

    def subtotal(self) -> float:
        return round(sum(item.quantity * item.unit_price for item in self.items), 2)

    def line_items(self) -> list[LineItem]:
        return [LineItem(i.sku, i.quantity, i.unit_price) for i in self.items]

    def clear(self) -> None:
        self.items = []

    def describe(self) -> str:
        return f"{self.owner}: " + ", ".join(f"{i.quantity}x{i.sku}" for i in self.items)

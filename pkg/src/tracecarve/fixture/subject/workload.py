"""Deterministic workload driver for the fixture subject.

Prints one line per observable result. ``--seed`` varies the arguments;
``--threads`` adds a concurrent phase on independent objects.
"""
from __future__ import annotations

import argparse
import random
import threading

from fontlib import cache
from fontlib.metrics import GlyphMetrics
from fontlib.naming import NamingTable
from fontlib.rendering import RenderingMode
from shop.cart import Cart
from shop.pricing import PriceCalculator

NAME_ROWS = [
    (1, 1, 0, 0, "Liberation Sans"),
    (1, 3, 1, 0x409, "Liberation Sans"),
    (2, 3, 1, 0x409, "Regular"),
    (4, 3, 1, 0x409, "Liberation Sans"),
    (6, 1, 0, 0, "LiberationSans"),
    (6, 3, 1, 0x409, "LiberationSans"),
]
NAME_QUERIES = [
    (1, 3, 1, 0x409),
    (2, 3, 1, 0x409),
    (4, 3, 1, 0x409),
    (6, 3, 1, 0x409),
    (6, 1, 0, 0),
    (3, 3, 1, 0x409),
    (6, 3, 1, 0x40C),
]
WIDTHS = {"a": 556, "b": 556, "c": 500, "i": 222, "m": 833, "w": 722}
PRODUCTS = [("pen", 1.5), ("ink", 4.25), ("pad", 3.0), ("clip", 0.1), ("tape", 2.75)]
FONT_PROGRAMS = {
    "Courier": "<type1 Courier 1.05>",
    "Times-Roman": "<type1 Times-Roman 1.05>",
    "Helvetica-Bold": "<type1 Helvetica-Bold 1.05>",
}


def font_phase(rng: random.Random, out: list[str]) -> None:
    table = NamingTable.from_tuples(NAME_ROWS)
    for _ in range(3):
        out.append(f"name (6, 1, 0, 0) = {table.get_name(6, 1, 0, 0)!r}")
    for _ in range(30):
        query = rng.choice(NAME_QUERIES)
        out.append(f"name {query} = {table.get_name(*query)!r}")
    sparse = NamingTable.from_tuples([(1, 1, 0, 0, "Courier"), (2, 1, 0, 0, "Bold")])
    for t in (table, sparse, table):
        out.append(f"family = {t.get_font_family()!r}")
    for name_id, platform_id in [(7, 3), (8, 1), (7, 3), (9, 3)]:
        out.append(f"record {name_id}/{platform_id} = {table.find_record(name_id, platform_id)!r}")

    for _ in range(50):
        fill = RenderingMode.FILL.is_fill()
    out.append(f"fill = {fill}")
    for mode in (RenderingMode.STROKE, RenderingMode.NEITHER, RenderingMode.STROKE):
        out.append(f"{mode.name} fill={mode.is_fill()} stroke={mode.is_stroke()}")

    fonts = cache.FontCache()
    for name in ["Courier", "Times-Roman", "Courier", "Helvetica-Bold"]:
        out.append(f"font {name} = {fonts.get_font(name)}")

    metrics = GlyphMetrics(1000, WIDTHS)
    for _ in range(12):
        glyph = rng.choice("abcimw?")
        out.append(
            f"glyph {glyph} advance={metrics.advance_width(glyph)} "
            f"scaled={metrics.scaled_width(glyph, rng.choice([10.0, 12.0]))} "
            f"used={metrics.record_usage(glyph)}"
        )


def shop_phase(rng: random.Random, out: list[str]) -> None:
    calculator = PriceCalculator(rng.choice([0.2, 0.25]))
    for customer in ("ada", "bob", "cyd", "dee"):
        cart = Cart(customer)
        for _ in range(rng.randint(2, 4)):
            sku, price = rng.choice(PRODUCTS)
            out.append(f"{customer} add {sku} -> {cart.add_item(sku, rng.randint(1, 3), price)}")
        out.append(f"{customer} count={cart.item_count()} subtotal={cart.subtotal()}")
        out.append(f"{customer} lines={[(i.sku, i.quantity) for i in cart.line_items()]}")
        total = calculator.total_with_tax(cart)
        out.append(f"{customer} tax={calculator.tax_for(cart.subtotal())} total={total.amount} {total.currency}")
        out.append(f"{customer} lucky={calculator.lucky_discount(total.amount)}")
        out.append(f"{customer} count={cart.item_count()}")
        cart.clear()
        out.append(f"{customer} cleared count={cart.item_count()}")


def thread_phase(rng: random.Random, threads: int, out: list[str]) -> None:
    results: list[list[str]] = [[] for _ in range(threads)]
    seeds = [rng.randrange(1 << 30) for _ in range(threads)]

    def work(index: int) -> None:
        local = random.Random(seeds[index])
        metrics = GlyphMetrics(1000, WIDTHS)
        cart = Cart(f"t{index}")
        for _ in range(20):
            glyph = local.choice("abcimw")
            results[index].append(f"t{index} {glyph} {metrics.advance_width(glyph)}")
            sku, price = local.choice(PRODUCTS)
            results[index].append(f"t{index} add {cart.add_item(sku, 1, price)} sub {cart.subtotal()}")

    workers = [threading.Thread(target=work, args=(i,)) for i in range(threads)]
    for worker in workers:
        worker.start()
    for worker in workers:
        worker.join()
    for lines in results:
        out.extend(lines)


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--threads", type=int, default=0)
    args = parser.parse_args(argv)
    random.seed(args.seed)
    rng = random.Random(args.seed)
    cache.warm(FONT_PROGRAMS)
    out: list[str] = []
    font_phase(rng, out)
    shop_phase(rng, out)
    if args.threads:
        thread_phase(rng, args.threads, out)
    print("\n".join(out))
    return 0


if __name__ == "__main__":
    raise SystemExit(main())

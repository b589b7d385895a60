from __future__ import annotations

import random

from shop.cart import Cart


class Money:
    # no __eq__, like many value classes that forgot one
    def __init__(self, amount: float, currency: str) -> None:
        self.amount = amount
        self.currency = currency


class PriceCalculator:
    def __init__(self, tax_rate: float, currency: str = "EUR") -> None:
        self.tax_rate = tax_rate
        self.currency = currency

    def tax_for(self, amount: float) -> float:
        return round(amount * self.tax_rate, 2)

    def total_with_tax(self, cart: Cart) -> Money:
        subtotal = cart.subtotal()
        return Money(round(subtotal + self.tax_for(subtotal), 2), self.currency)

    def lucky_discount(self, total: float) -> float:
        if random.random() < 0.5:
            return round(total * 0.9, 2)
        return total

    def legacy_rate(self, region: str) -> float:
        return {"north": 0.2, "south": 0.1}.get(region, self.tax_rate)

from shop.cart import Cart
from shop.pricing import PriceCalculator


def make_cart():
    cart = Cart("ada")
    cart.add_item("pen", 2, 1.5)
    cart.add_item("ink", 1, 4.25)
    return cart


def test_add_item_returns_quantity():
    cart = Cart("bob")
    assert cart.add_item("pen", 2, 1.5) == 2
    assert cart.add_item("pen", 1, 1.5) == 3


def test_item_count():
    make_cart().item_count()


def test_subtotal():
    assert make_cart().subtotal() == 7.25


def test_line_items_is_list():
    assert isinstance(make_cart().line_items(), list)


def test_clear():
    cart = make_cart()
    cart.clear()
    assert cart.items == []


def test_tax_for():
    PriceCalculator(0.2).tax_for(10.0)


def test_total_with_tax():
    PriceCalculator(0.2).total_with_tax(make_cart())


def test_lucky_discount():
    PriceCalculator(0.2).lucky_discount(100.0)

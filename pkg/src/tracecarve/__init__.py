"""Record target-method invocations and carve differential unit tests from them."""

__version__ = "0.1.0"

"""Shopping cart and pricing."""

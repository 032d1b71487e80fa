"""Command-line tools to run experiments."""

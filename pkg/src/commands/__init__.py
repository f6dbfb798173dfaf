"""Command groups for hsfl CLI."""

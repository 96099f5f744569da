def main():
    """Command line entry point."""
    # imported here so `import src.<module>` stays light
    from src.app import cli
    cli()

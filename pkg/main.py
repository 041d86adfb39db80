#!/usr/bin/env python3
import sys


def main():
    """Main application entry point"""
    from ui.cli import main as cli_main

    sys.exit(cli_main(sys.argv[1:]))


if __name__ == "__main__":
    main()

"""
Entry point for `python -m ewel.cli`
"""

from .main import main

if __name__ == "__main__":
    main()

"""Run the spreadcore command line."""
from .cli import main_entry

main_entry()

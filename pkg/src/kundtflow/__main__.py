from kundtflow.cli import main

main()

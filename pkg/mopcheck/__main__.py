from mopcheck.cli import main

main()

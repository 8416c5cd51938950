from hecke_pm.cli import main

main()

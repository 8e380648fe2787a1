from symlift.main import main

main()

"""External runner for main function"""

from oblivious_perturbation.main import main

if __name__ == "__main__":
    main()

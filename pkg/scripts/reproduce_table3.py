"""Power of the no-interaction test in the crossed two-factor six-marker design."""

from _power import power_table

if __name__ == "__main__":
    power_table("table3", __doc__)

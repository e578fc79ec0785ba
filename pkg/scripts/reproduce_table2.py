"""Power of the all-pairs test when one diseased marker location is shifted."""

from _power import power_table

if __name__ == "__main__":
    power_table("table2", __doc__)

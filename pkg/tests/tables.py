"""Reference typical ranks used as frozen expectations.

Where a reference cell lists more than one typical rank, the smallest one is
stored; that is the generic rank over the complex numbers, which is what
Jacobian saturation measures.
"""

# rows I = 2..12, columns in report.TABLE1_COLUMNS order
TABLE1 = {
    2: (2, 3, 4, 3, 4, 5, 4, 5),
    3: (3, 3, 4, 5, 5, 5, 6, 6),
    4: (4, 4, 4, 5, 6, 6, 7, 8),
    5: (4, 5, 5, 5, 6, 8, 8, 9),
    6: (4, 6, 6, 6, 7, 8, 8, 10),
    7: (4, 6, 7, 7, 7, 9, 9, 10),
    8: (4, 6, 8, 8, 8, 9, 10, 11),
    9: (4, 6, 8, 9, 9, 9, 10, 12),
    10: (4, 6, 8, 9, 10, 10, 10, 12),
    11: (4, 6, 8, 9, 11, 11, 11, 13),
    12: (4, 6, 8, 9, 12, 12, 12, 13),
}

# K = 2..9
TABLE2 = (2, 5, 7, 10, 14, 19, 24, 30)

# order L -> (ranks, fiber dims) for N = 2..8 (L=3) and N = 2..6 (L=4)
TABLE3 = {
    3: (TABLE2[:7], (0, 8, 6, 5, 8, 18, 16)),
    4: ((4, 9, 20, 37, 62), (4, 0, 4, 4, 6)),
}

# rows I = 2..10, columns J = 2..5
TABLE4 = {
    2: (2, 3, 4, 5),
    3: (3, 4, 6, 7),
    4: (3, 4, 6, 8),
    5: (3, 5, 7, 9),
    6: (3, 6, 7, 9),
    7: (3, 6, 7, 10),
    8: (3, 6, 8, 10),
    9: (3, 6, 9, 11),
    10: (3, 6, 10, 11),
}

TABLE5 = {
    2: (1, 2, 3, 4),
    3: (1, 3, 4, 6),
    4: (1, 3, 4, 6),
    5: (1, 3, 5, 7),
    6: (1, 3, 6, 7),
    7: (1, 3, 6, 7),
    8: (1, 3, 6, 8),
    9: (1, 3, 6, 9),
    10: (1, 3, 6, 10),
}

# order L -> (ranks, fiber dims) for N = 2..8
TABLE6 = {
    3: ((2, 4, 5, 8, 10, 12, 15), (0, 2, 0, 5, 4, 0, 0)),
    4: ((3, 6, 10, 15, 21, 30, 42), (1, 3, 5, 5, 0, 0, 6)),
}

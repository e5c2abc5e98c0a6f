"""Published P_FA = 0.1 SCS thresholds used as reproduction targets.

Keys are (N_d, t_s in ms).
"""

SIMULATED = {
    (6, 0.1): 3.59, (6, 0.5): 3.07, (6, 1.0): 2.92, (6, 2.0): 2.75,
    (12, 0.1): 6.51, (12, 0.5): 5.27, (12, 1.0): 4.29, (12, 2.0): 4.79,
    (30, 0.1): 14.17, (30, 0.5): 11.27, (30, 1.0): 10.95, (30, 2.0): 10.62,
}

ANALYTIC = {
    (6, 0.1): 3.39, (6, 0.5): 2.83, (6, 1.0): 2.73, (6, 2.0): 2.70,
    (12, 0.1): 5.92, (12, 0.5): 4.89, (12, 1.0): 4.70, (12, 2.0): 4.64,
    (30, 0.1): 13.16, (30, 0.5): 10.96, (30, 1.0): 10.60, (30, 2.0): 10.36,
}

TOLERANCE = 0.15  # relative, per cell

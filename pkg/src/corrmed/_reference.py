"""Published benchmark values for the reproduce command.

Each table maps block label -> method -> quantity -> (mean, sd). These are
the reference Monte Carlo results the reproduce targets print alongside
fresh runs for side-by-side comparison; sd is None where the source table
prints none. Values are transcribed verbatim, including any rounding quirks
of the source.
"""

# single-session benchmark: methods fit at the true correlation ("cma")
# and at zero ("bk"); 1000-run means with SDs.
TABLE1 = {
    "full": {
        "true_delta": 0.5,
        "cma": {
            "a": (-5.002, 0.200), "c": (4.003, 0.556), "b": (-9.999, 0.104),
            "c_total": (54.016, 1.901), "ab_prod": (50.012, 2.085),
            "ab_diff": (50.012, 2.085),
        },
        "bk": {
            "a": (-5.002, 0.200), "c": (6.505, 0.479), "b": (-9.499, 0.089),
            "c_total": (54.016, 1.901), "ab_prod": (47.511, 1.971),
            "ab_diff": (47.511, 1.971),
        },
    },
    "a0": {
        "true_delta": 0.5,
        "cma": {
            "a": (0.001, 0.196), "c": (4.004, 0.197), "b": (-10.001, 0.103),
            "c_total": (3.994, 1.872), "ab_prod": (-0.010, 1.962),
            "ab_diff": (-0.010, 1.962),
        },
        "bk": {
            "a": (0.001, 0.196), "c": (4.004, 0.171), "b": (-9.500, 0.091),
            "c_total": (3.994, 1.872), "ab_prod": (-0.010, 1.864),
            "ab_diff": (-0.010, 1.864),
        },
    },
    "b0": {
        "true_delta": 0.5,
        "cma": {
            "a": (-5.014, 0.198), "c": (3.978, 0.542), "b": (-0.001, 0.100),
            "c_total": (3.986, 0.201), "ab_prod": (0.007, 0.497),
            "ab_diff": (0.007, 0.497),
        },
        "bk": {
            "a": (-5.014, 0.198), "c": (6.485, 0.466), "b": (0.498, 0.084),
            "c_total": (3.986, 0.201), "ab_prod": (-2.499, 0.435),
            "ab_diff": (-2.499, 0.435),
        },
    },
    "a0b0": {
        "true_delta": 0.5,
        "cma": {
            "a": (-0.002, 0.202), "c": (4.000, 0.200), "b": (-0.003, 0.104),
            "c_total": (4.001, 0.198), "ab_prod": (0.001, 0.021),
            "ab_diff": (0.001, 0.021),
        },
        "bk": {
            "a": (-0.002, 0.202), "c": (4.001, 0.174), "b": (0.498, 0.091),
            "c_total": (4.001, 0.198), "ab_prod": (-0.0001, 0.100),
            "ab_diff": (-0.0001, 0.100),
        },
    },
    "d0": {
        "true_delta": 0.0,
        "cma": {
            "a": (-5.007, 0.198), "c": (3.981, 0.549), "b": (-10.004, 0.100),
            "c_total": (54.065, 1.992), "ab_prod": (50.083, 2.028),
            "ab_diff": (50.083, 2.028),
        },
        "bk": {
            "a": (-5.007, 0.198), "c": (3.981, 0.549), "b": (-10.004, 0.100),
            "c_total": (54.065, 1.992), "ab_prod": (50.083, 2.028),
            "ab_diff": (50.083, 2.028),
        },
    },
}

# multilevel benchmark with the correlation supplied to each method:
# h_inner/ts at the truth, kkb at zero, the pooled single-session fit at
# the truth; 200-run means with SDs, variance components without SDs.
TABLE2 = {
    "full": {
        "true_delta": 0.5,
        "h_inner": {
            "a": (-5.006, 0.103), "c": (4.002, 0.111), "b": (-9.999, 0.101),
            "c_total": (54.045, 1.109), "ab_prod": (50.056, 1.098),
            "ab_diff": (50.042, 1.107), "psi_a": (0.384, None),
            "psi_c": (0.330, None), "psi_b": (0.387, None), "lam2": (0.366, None),
        },
        "ts": {
            "a": (-5.006, 0.103), "c": (3.991, 0.112), "b": (-10.002, 0.101),
            "c_total": (54.045, 1.109), "ab_prod": (50.066, 1.097),
            "ab_diff": (50.054, 1.107), "psi_a": (0.487, None),
            "psi_c": (0.553, None), "psi_b": (0.482, None), "lam2": (0.603, None),
        },
        "kkb": {
            "a": (-5.006, 0.103), "c": (6.493, 0.119), "b": (-9.502, 0.102),
            "c_total": (54.045, 1.109), "ab_prod": (47.549, 1.061),
            "ab_diff": (57.551, 1.062), "psi_a": (0.483, None),
            "psi_c": (0.682, None), "psi_b": (0.477, None), "lam2": (0.621, None),
        },
        "pooled": {
            "a": (-5.006, 0.104), "c": (-3.380, 1.153), "b": (-11.471, 0.247),
            "c_total": (54.049, 1.115), "ab_prod": (57.429, 1.864),
            "ab_diff": (57.429, 1.864),
        },
    },
    "a0": {
        "true_delta": 0.5,
        "h_inner": {
            "a": (-0.006, 0.103), "c": (3.989, 0.107), "b": (-10.001, 0.101),
            "c_total": (4.035, 1.046), "ab_prod": (0.059, 1.031),
            "ab_diff": (0.046, 1.047), "psi_a": (0.354, None),
            "psi_c": (0.351, None), "psi_b": (0.351, None), "lam2": (0.406, None),
        },
        "ts": {
            "a": (-0.006, 0.103), "c": (3.989, 0.107), "b": (-10.002, 0.101),
            "c_total": (4.035, 1.046), "ab_prod": (0.059, 1.031),
            "ab_diff": (0.046, 1.047), "psi_a": (0.509, None),
            "psi_c": (0.508, None), "psi_b": (0.503, None), "lam2": (0.519, None),
        },
        "kkb": {
            "a": (-0.006, 0.103), "c": (3.992, 0.116), "b": (-9.502, 0.102),
            "c_total": (4.035, 1.046), "ab_prod": (0.041, 0.995),
            "ab_diff": (0.044, 0.996), "psi_a": (0.499, None),
            "psi_c": (0.646, None), "psi_b": (0.493, None), "lam2": (0.556, None),
        },
        "pooled": {
            "a": (-0.006, 0.104), "c": (3.975, 0.153), "b": (-10.450, 0.124),
            "c_total": (4.038, 1.053), "ab_prod": (0.063, 1.084),
            "ab_diff": (0.063, 1.084),
        },
    },
    "b0": {
        "true_delta": 0.5,
        "h_inner": {
            "a": (-5.006, 0.103), "c": (4.002, 0.111), "b": (0.0005, 0.101),
            "c_total": (3.985, 0.519), "ab_prod": (-0.004, 0.506),
            "ab_diff": (-0.017, 0.504), "psi_a": (0.384, None),
            "psi_c": (0.330, None), "psi_b": (0.387, None), "lam2": (0.366, None),
        },
        "ts": {
            "a": (-5.006, 0.103), "c": (3.991, 0.112), "b": (-0.002, 0.101),
            "c_total": (3.985, 0.519), "ab_prod": (0.006, 0.506),
            "ab_diff": (-0.006, 0.505), "psi_a": (0.487, None),
            "psi_c": (0.553, None), "psi_b": (0.482, None), "lam2": (0.603, None),
        },
        "kkb": {
            "a": (-5.006, 0.103), "c": (6.493, 0.119), "b": (0.498, 0.102),
            "c_total": (3.985, 0.519), "ab_prod": (-2.511, 0.512),
            "ab_diff": (-2.508, 0.512), "psi_a": (0.483, None),
            "psi_c": (0.692, None), "psi_b": (0.477, None), "lam2": (0.621, None),
        },
        "pooled": {
            "a": (-5.006, 0.104), "c": (-3.380, 1.153), "b": (-1.471, 0.247),
            "c_total": (3.987, 0.520), "ab_prod": (7.367, 1.274),
            "ab_diff": (7.367, 1.274),
        },
    },
    "a0b0": {
        "true_delta": 0.5,
        "h_inner": {
            "a": (-0.006, 0.103), "c": (3.989, 0.107), "b": (-0.001, 0.101),
            "c_total": (3.975, 0.148), "ab_prod": (-0.001, 0.010),
            "ab_diff": (-0.013, 0.108), "psi_a": (0.354, None),
            "psi_c": (0.351, None), "psi_b": (0.351, None), "lam2": (0.406, None),
        },
        "ts": {
            "a": (-0.006, 0.103), "c": (3.989, 0.107), "b": (-0.002, 0.101),
            "c_total": (3.975, 0.148), "ab_prod": (-0.001, 0.010),
            "ab_diff": (-0.013, 0.108), "psi_a": (0.509, None),
            "psi_c": (0.508, None), "psi_b": (0.503, None), "lam2": (0.518, None),
        },
        "kkb": {
            "a": (-0.006, 0.103), "c": (3.992, 0.116), "b": (0.498, 0.101),
            "c_total": (3.975, 0.148), "ab_prod": (-0.018, 0.108),
            "ab_diff": (-0.016, 0.114), "psi_a": (0.499, None),
            "psi_c": (0.646, None), "psi_b": (0.493, None), "lam2": (0.556, None),
        },
        "pooled": {
            "a": (-0.006, 0.011), "c": (3.975, 0.152), "b": (-0.450, 0.124),
            "c_total": (3.976, 0.149), "ab_prod": (0.002, 0.050),
            "ab_diff": (0.002, 0.050),
        },
    },
    "d0": {
        "true_delta": 0.0,
        "h_inner": {
            "a": (-5.006, 0.103), "c": (3.990, 0.111), "b": (-10.002, 0.101),
            "c_total": (54.044, 1.108), "ab_prod": (50.066, 1.097),
            "ab_diff": (50.053, 1.106), "psi_a": (0.349, None),
            "psi_c": (0.323, None), "psi_b": (0.349, None), "lam2": (0.371, None),
        },
        "ts": {
            "a": (-5.005, 0.103), "c": (3.990, 0.112), "b": (-10.002, 0.101),
            "c_total": (54.044, 1.108), "ab_prod": (50.066, 1.096),
            "ab_diff": (50.053, 1.105), "psi_a": (0.487, None),
            "psi_c": (0.554, None), "psi_b": (0.482, None), "lam2": (0.603, None),
        },
        "kkb": {
            "a": (-5.006, 0.103), "c": (3.990, 0.112), "b": (-10.002, 0.101),
            "c_total": (54.044, 1.108), "ab_prod": (50.051, 1.104),
            "ab_diff": (50.053, 1.105), "psi_a": (0.487, None),
            "psi_c": (0.554, None), "psi_b": (0.482, None), "lam2": (0.603, None),
        },
        "pooled": {
            "a": (-5.006, 0.103), "c": (4.113, 0.809), "b": (-9.975, 0.197),
            "c_total": (54.048, 1.113), "ab_prod": (49.935, 1.453),
            "ab_diff": (49.935, 1.453),
        },
    },
}

# multilevel benchmark with the correlation estimated (ml, h, h-ts) or
# fixed at zero (kkb); 200-run means with SDs.
TABLE3 = {
    "full": {
        "true_delta": 0.5,
        "ml": {
            "delta": (0.334, 0.082), "a": (-5.000, 0.103), "c": (4.938, 0.429),
            "b": (-9.817, 0.130), "c_total": (54.004, 1.118),
            "ab_prod": (49.078, 1.143), "ab_diff": (49.066, 1.152),
            "psi_a": (0.503, None), "psi_c": (0.578, None),
            "psi_b": (0.494, None), "lam2": (0.589, None),
        },
        "h": {
            "delta": (0.366, 0.098), "a": (-5.000, 0.103), "c": (4.757, 0.568),
            "b": (-9.853, 0.160), "c_total": (54.004, 1.118),
            "ab_prod": (49.257, 1.187), "ab_diff": (49.247, 1.195),
            "psi_a": (0.400, None), "psi_c": (0.341, None),
            "psi_b": (0.402, None), "lam2": (0.355, None),
        },
        "h_ts": {
            "delta": (0.366, 0.098), "a": (-5.000, 0.103), "c": (4.753, 0.574),
            "b": (-9.854, 0.161), "c_total": (54.004, 1.118),
            "ab_prod": (49.263, 1.189), "ab_diff": (49.251, 1.197),
            "psi_a": (0.502, None), "psi_c": (0.564, None),
            "psi_b": (0.493, None), "lam2": (0.595, None),
        },
        "kkb": {
            "a": (-5.000, 0.103), "c": (6.489, 0.121), "b": (-9.506, 0.105),
            "c_total": (54.004, 1.118), "ab_prod": (47.513, 1.065),
            "ab_diff": (47.515, 1.066), "psi_a": (0.496, None),
            "psi_c": (0.692, None), "psi_b": (0.486, None), "lam2": (0.618, None),
        },
    },
    "a0": {
        "true_delta": 0.5,
        "ml": {
            "delta": (0.463, 0.064), "a": (-0.006, 0.103), "c": (3.989, 0.107),
            "b": (-9.959, 0.129), "c_total": (4.035, 1.046),
            "ab_prod": (0.059, 1.026), "ab_diff": (0.046, 1.042),
            "psi_a": (0.509, None), "psi_c": (0.513, None),
            "psi_b": (0.504, None), "lam2": (0.517, None),
        },
        "h": {
            "delta": (0.495, 0.056), "a": (-0.006, 0.103), "c": (3.989, 0.107),
            "b": (-9.998, 0.126), "c_total": (4.035, 1.046),
            "ab_prod": (0.059, 1.030), "ab_diff": (0.046, 1.047),
            "psi_a": (0.354, None), "psi_c": (0.348, None),
            "psi_b": (0.352, None), "lam2": (0.405, None),
        },
        "h_ts": {
            "delta": (0.495, 0.056), "a": (-0.006, 0.103), "c": (3.989, 0.107),
            "b": (-9.998, 0.126), "c_total": (4.035, 1.046),
            "ab_prod": (0.059, 1.030), "ab_diff": (0.046, 1.047),
            "psi_a": (0.509, None), "psi_c": (0.504, None),
            "psi_b": (0.503, None), "lam2": (0.518, None),
        },
        "kkb": {
            "a": (-0.006, 0.103), "c": (3.992, 0.116), "b": (-9.502, 0.102),
            "c_total": (4.035, 1.046), "ab_prod": (0.041, 0.995),
            "ab_diff": (0.044, 0.996), "psi_a": (0.499, None),
            "psi_c": (0.646, None), "psi_b": (0.493, None), "lam2": (0.556, None),
        },
    },
    "b0": {
        "true_delta": 0.5,
        "ml": {
            "delta": (0.334, 0.082), "a": (-5.000, 0.103), "c": (4.938, 0.429),
            "b": (0.183, 0.130), "c_total": (4.007, 0.539),
            "ab_prod": (-0.918, 0.654), "ab_diff": (-0.931, 0.652),
            "psi_a": (0.503, None), "psi_c": (0.578, None),
            "psi_b": (0.494, None), "lam2": (0.589, None),
        },
        "h": {
            "delta": (0.366, 0.098), "a": (-5.000, 0.103), "c": (4.755, 0.569),
            "b": (0.147, 0.160), "c_total": (4.007, 0.539),
            "ab_prod": (-0.737, 0.803), "ab_diff": (-0.748, 0.798),
            "psi_a": (0.400, None), "psi_c": (0.341, None),
            "psi_b": (0.402, None), "lam2": (0.355, None),
        },
        "h_ts": {
            "delta": (0.366, 0.098), "a": (-5.000, 0.103), "c": (4.751, 0.576),
            "b": (0.146, 0.161), "c_total": (4.007, 0.539),
            "ab_prod": (-0.732, 0.806), "ab_diff": (-0.744, 0.803),
            "psi_a": (0.502, None), "psi_c": (0.564, None),
            "psi_b": (0.493, None), "lam2": (0.595, None),
        },
        "kkb": {
            "a": (-5.000, 0.103), "c": (6.489, 0.121), "b": (0.494, 0.105),
            "c_total": (4.008, 0.539), "ab_prod": (-2.483, 0.531),
            "ab_diff": (-2.482, 0.531), "psi_a": (0.496, None),
            "psi_c": (0.692, None), "psi_b": (0.486, None), "lam2": (0.618, None),
        },
    },
    "a0b0": {
        "true_delta": 0.5,
        "ml": {
            "delta": (0.463, 0.064), "a": (-0.006, 0.103), "c": (3.989, 0.107),
            "b": (0.041, 0.129), "c_total": (3.975, 0.148),
            "ab_prod": (-0.001, 0.013), "ab_diff": (-0.013, 0.108),
            "psi_a": (0.509, None), "psi_c": (0.513, None),
            "psi_b": (0.504, None), "lam2": (0.517, None),
        },
        "h": {
            "delta": (0.495, 0.056), "a": (-0.006, 0.103), "c": (3.989, 0.107),
            "b": (0.002, 0.126), "c_total": (3.975, 0.148),
            "ab_prod": (-0.001, 0.012), "ab_diff": (-0.013, 0.109),
            "psi_a": (0.354, None), "psi_c": (0.347, None),
            "psi_b": (0.352, None), "lam2": (0.405, None),
        },
        "h_ts": {
            "delta": (0.495, 0.056), "a": (-0.006, 0.103), "c": (3.989, 0.107),
            "b": (0.002, 0.126), "c_total": (3.975, 0.148),
            "ab_prod": (-0.001, 0.012), "ab_diff": (-0.013, 0.109),
            "psi_a": (0.509, None), "psi_c": (0.504, None),
            "psi_b": (0.503, None), "lam2": (0.518, None),
        },
        "kkb": {
            "a": (-0.006, 0.103), "c": (3.992, 0.116), "b": (0.498, 0.101),
            "c_total": (3.975, 0.148), "ab_prod": (-0.018, 0.108),
            "ab_diff": (-0.016, 0.114), "psi_a": (0.499, None),
            "psi_c": (0.646, None), "psi_b": (0.493, None), "lam2": (0.556, None),
        },
    },
    "d0": {
        "true_delta": 0.0,
        "ml": {
            "delta": (0.005, 0.079), "a": (-4.994, 0.114), "c": (3.972, 0.409),
            "b": (-10.010, 0.135), "c_total": (53.948, 1.186),
            "ab_prod": (49.987, 1.260), "ab_diff": (49.977, 1.252),
            "psi_a": (0.486, None), "psi_c": (0.557, None),
            "psi_b": (0.489, None), "lam2": (0.598, None),
        },
        "h": {
            "delta": (-0.018, 0.151), "a": (-4.994, 0.114), "c": (4.085, 0.801),
            "b": (-9.987, 0.186), "c_total": (53.948, 1.186),
            "ab_prod": (49.873, 1.415), "ab_diff": (49.863, 1.415),
            "psi_a": (0.401, None), "psi_c": (0.298, None),
            "psi_b": (0.412, None), "lam2": (0.333, None),
        },
        "h_ts": {
            "delta": (-0.018, 0.151), "a": (-4.994, 0.114), "c": (4.086, 0.809),
            "b": (-9.987, 0.187), "c_total": (53.948, 1.186),
            "ab_prod": (49.872, 1.418), "ab_diff": (49.862, 1.421),
            "psi_a": (0.485, None), "psi_c": (0.550, None),
            "psi_b": (0.487, None), "lam2": (0.604, None),
        },
        "kkb": {
            "a": (-4.994, 0.114), "c": (3.995, 0.111), "b": (-10.005, 0.110),
            "c_total": (53.948, 1.186), "ab_prod": (49.951, 1.184),
            "ab_diff": (49.954, 1.185), "psi_a": (0.486, None),
            "psi_c": (0.553, None), "psi_b": (0.488, None), "lam2": (0.599, None),
        },
    },
}

REFERENCE = {"table1": TABLE1, "table2": TABLE2, "table3": TABLE3}

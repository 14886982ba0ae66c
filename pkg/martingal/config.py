""" Contains tolerances, default sizes and paths used across martingal. """

import os.path

# comparisons of floating point quantities
tolerance = 1e-9
pnorm_tolerance = 1e-12
monotone_tolerance = 1e-12

# rational square roots (1/sqrt(n), Procedure 2 moduli) are floored to this many bits
sqrt_precision_bits = 60

# verification suites
default_trials = 1000
default_n_max = 4
default_max_children = 3
default_value_bound = 5
mgf_lambda_grid = tuple(round(0.05 * i, 2) for i in range(1, 10))  # 0.05 ... 0.45
tail_lambda_grid = tuple(round(0.1 * i, 1) for i in range(1, 31))  # 0.1 ... 3.0

# Luxemburg norm bisection, bracket given in units of sup of the square function
luxemburg_bracket = (1e-6, 10.0)
luxemburg_iterations = 200
luxemburg_xtol = 1e-12

# extremal search
default_budget = 10000
default_restarts = 4
default_method = "nelder-mead"

# brute force enumeration over sign vectors
max_enumeration_n = 20

# where replay files of failed bounds go
violation_path = os.path.expanduser(os.environ.get("MARTINGAL_VIOLATIONS", "."))

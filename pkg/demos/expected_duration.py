"""How long will a test run, and how many failures will it see?

Run with ``python demos/expected_duration.py``. For a fixed design (n, m)
this tabulates the expected number of failures E[K] and the expected test
duration E[T*] as the supplementary time S grows, checks the quadrature
against simulation, and shows what a change of time unit does.
"""

from mixcens.censoring import CensoringScheme
from mixcens.distributions import WeibullParams
from mixcens.expectation import check_scale_invariance, expected_duration, expected_duration_mc

p = WeibullParams(1.5, 2.0)
n, m = 10, 5

print(f"Weibull(gamma={p.gamma}, delta={p.delta}), n={n}, m={m}")
print(f"{'S':>6}{'E[K]':>10}{'E[T*]':>10}{'MC E[T*]':>12}{'MC s.e.':>10}")
for S in (0.0, 0.1, 0.3, 0.6, 1.0, 2.0):
    scheme = CensoringScheme(n, m, S)
    q = expected_duration(scheme, p)
    mc = expected_duration_mc(scheme, p, replications=200_000, seed=1)
    print(f"{S:6.1f}{q.expected_failures:10.4f}{q.expected_duration:10.4f}"
          f"{mc.expected_duration:12.4f}{mc.mc_std_error:10.5f}")

# At S = 0 the design is plain Type II censoring (stop at the m-th failure);
# as S grows it approaches the complete test (wait for all n failures).

# Treating X_{m:n} and X_{n:n} as independent gives a different, wrong answer:
scheme = CensoringScheme(n, m, 0.3)
joint = expected_duration(scheme, p).expected_duration
product = expected_duration(scheme, p, integrand="product").expected_duration
print(f"\nAt S=0.3: exact E[T*] = {joint:.5f}, independence approximation = {product:.5f}")

# Measuring time in different units (X -> alpha X, S -> alpha S) rescales the
# expected duration by alpha and leaves the law of K untouched.
for alpha in (0.1, 2.5, 10.0):
    rep = check_scale_invariance(scheme, p, alpha, replications=100_000)
    print(f"alpha={alpha:5.1f}: E[T*] ratio {rep.ratio:.10f}, "
          f"max change in P(K=k) {rep.max_prob_diff:.1e}, chi-square p {rep.chi2_pvalue:.3f}")

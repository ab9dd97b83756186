"""
Where does the bulk end?
========================

Three candidate boundaries between the modal region and a tail, computed for
a few textbook densities.
"""

from tailpoint import parse_spec, report

# closed forms where they exist, numeric search otherwise
for text in ["gaussian(mu=0,sigma=1)", "cauchy()", "studentt(nu=3)", "lognormal(mu=0,sigma=0.5)", "skewt(nu=3,s=10)"]:
    r = report(parse_spec(text))
    right = r.right
    print(f"{text:28s} mode={r.mode:+.4f}")
    for name in ("pinf", "pmconv", "pmcurv"):
        value, cdf = getattr(right, name), right.cdf_at[name]
        print(f"    {name:7s} {value:9.5f}  F={cdf:.4f}  ({right.method[name].value})")

# the cdf at the point is location/scale free: the Gaussian always gives ~0.958
print(report(parse_spec("gaussian(mu=10,sigma=7)")).right.cdf_at["pmconv"])

# an Exponential has no inflection point at all
print(report(parse_spec("exponential(rate=1)")).to_dict()["right"])

"""Weibull variation index and shape ratio over the tabulated shape grid."""

import argparse
from dataclasses import dataclass, field

from varindex.families import weibull_shape_ratio, weibull_variation_class
from varindex.norta import weibull_vi


@dataclass
class Config:
    betas: list = field(default_factory=lambda: [0.1, 0.3, 0.5, 0.8, 1, 2, 4, 10, 100])
    tol: float = 0.05


def run(cfg: Config) -> list[dict]:
    return [{"beta": b, "vi": float(weibull_vi(b)), "ratio": float(weibull_shape_ratio(b)),
             "class": weibull_variation_class(b, cfg.tol).label} for b in cfg.betas]


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--tol", type=float, default=0.05)
    cfg = Config(tol=ap.parse_args().tol)
    print(f"{'beta':>6} {'VI(beta)':>14} {'beta G(2/b)/G(1/b)^2':>22}  class")
    for row in run(cfg):
        print(f"{row['beta']:>6g} {row['vi']:>14.6g} {row['ratio']:>22.6g}  {row['class']}")


if __name__ == "__main__":
    main()

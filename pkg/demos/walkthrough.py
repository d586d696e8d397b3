"""Walk through the toy construction at m = 16, tau = 1/2, t = 5/6.

Run with ``python3 demos/walkthrough.py [n]``. Every number printed is exact;
decimals are only for reading.
"""
import sys

from fracproj import (
    ahlfors1_check,
    build_A,
    build_B,
    build_H,
    build_K,
    build_mu,
    build_Theta,
    cover_report,
    inclusion_distance,
    neighborhood_cell_count,
    projection_sweep,
    regularity_constant,
    rescaled_theta,
    structural_config,
    union_sumset,
)


def main(n: int = 2) -> None:
    cfg = structural_config(2, 4, "1/2", "5/6", n)
    A, B, T = build_A(cfg), build_B(cfg), build_Theta(cfg)
    print(f"m = {cfg.m}, delta = {cfg.delta}, |A| = {len(A)}, |B| = {len(B)}, |Theta| = {len(T)}")

    for name, S, s in (("A", A, cfg.spacing_A), ("B", B, cfg.spacing_B), ("Theta", T, cfg.spacing_Theta)):
        C = regularity_constant(S, s, cfg.delta, 1).C_min
        print(f"  {name}: ({s}, C)-regular with C = {C} ~ {C.decimal(6)}")

    # the union of projections and the set H that controls it
    S = union_sumset(A, T, B)
    rep = cover_report(S, cfg.delta, cfg.t)
    H = build_H(cfg)
    inc = inclusion_distance(S, H, 4 * cfg.delta.value)
    cells = neighborhood_cell_count(H, 4 * cfg.delta.value, cfg.delta)
    print(f"N_delta(A + Theta B) = {rep.count}, target delta^-(1+t)/2 ~ {rep.bound_target.decimal(6)}, ratio ~ {rep.ratio.decimal(6)}")
    print(f"  max distance to H = {inc.max_distance} (budget {4 * cfg.delta.value}), |H| = {len(H)}")
    print(f"  chain {rep.count} <= {cells} <= {9 * len(H)}")

    # the product set and its projections
    K = build_K(cfg)
    reg = ahlfors1_check(build_mu(cfg), cfg.delta, 1, cfg)
    print(f"|K| = {len(K.points2d)}, Ahlfors-1 constant of mu = {reg.constant}")
    for regime, info in sorted(reg.regimes.items()):
        print(f"  {regime}: worst {info['worst']}")
    sweep = projection_sweep(K, rescaled_theta(cfg))
    for theta, r in sweep.per_theta:
        print(f"  theta = {theta.value}: N_delta(pi_theta K) = {r.count}")
    print(f"  union over theta: {sweep.union.count}")


if __name__ == "__main__":
    main(int(sys.argv[1]) if len(sys.argv) > 1 else 2)

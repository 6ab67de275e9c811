"""Quick check that the compiled extension loads and agrees with known values."""

import math

import spinbath


def main():
    sys = spinbath.solve_eta(0.1, 0.05)
    assert 0.9 < sys.eta < 0.95, sys
    assert not sys.localized

    times = spinbath.time_grid(sys, span=20.0, points=81)
    p = spinbath.population_difference(sys, times)
    assert abs(p[0] - 1.0) < 1e-6
    assert all(abs(v) <= 1.0 + 1e-9 for v in p)

    pole = spinbath.pole_data(sys)
    assert pole.exists and pole.gamma > 0
    wwa = spinbath.wwa_population(sys, times)
    assert max(abs(a - b) for a, b in zip(p, wwa)) < 0.05

    alpha_c = spinbath.critical_coupling(0.1)
    assert abs(alpha_c - 0.5121) < 1e-3, alpha_c
    assert spinbath.classify_dynamics(0.1, 0.6) == "incoherent"

    tau = spinbath.tau_x(sys, times[:5], temperature=0.05)
    assert tau[0] == 0.0 and all(math.isfinite(v) for v in tau)

    rows = spinbath.shiba_table()
    assert len(rows) == 13
    coherent = [r for r in rows if r["coherent"]]
    assert all(abs(r["ratio"] - 1.0) < 1e-5 for r in coherent)

    boson = spinbath.solve_eta(0.1, 0.1, temperature=0.0, bath="boson")
    spin = spinbath.solve_eta(0.1, 0.1)
    grid = spinbath.time_grid(spin, points=11)
    pb = spinbath.population_difference(boson, grid)
    ps = spinbath.population_difference(spin, grid)
    assert max(abs(a - b) for a, b in zip(pb, ps)) < 1e-8

    niba = spinbath.niba_population([0.1 * k for k in range(101)], 0.1, 0.2)
    assert niba[0] == 1.0 and len(niba) == 101

    assert spinbath.ground_state_energy(0.1, 0.2) < 0.0

    try:
        spinbath.solve_eta(-1.0, 0.1)
    except ValueError:
        pass
    else:
        raise AssertionError("negative delta should raise ValueError")

    print("smoke test passed")


if __name__ == "__main__":
    main()

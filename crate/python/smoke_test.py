"""Smoke test for the exsys_py extension module."""

import math
import sys

import exsys_py as ex


def main():
    mesh = ex.Mesh.generate("twisted-cylinder", n="4", res="32")
    assert mesh.name == "twisted-cylinder"
    assert mesh.vertex_count == 32 * 16
    assert abs(mesh.area() - 1.0) < 0.05
    again = ex.Mesh.parse(mesh.to_text())
    assert again.to_text() == mesh.to_text()

    run = ex.run_pipeline(mesh, samples=200, seed=7)
    cert = run.certificate
    assert cert.kind == "v-in-cube", run.summary
    cert.verify(mesh)
    assert cert.witness_diameter <= math.sqrt(3) / run.m * 1.0000001
    back = ex.Certificate.from_text(cert.to_text())
    back.verify(mesh)
    assert run.report.extrinsic_upper > 0

    short = ex.run_pipeline(
        ex.Mesh.generate("twisted-cylinder", n="2", res="32"),
        spacing="4",
        offset=("0.001", "1.3", "2.1"),
    )
    assert short.certificate.kind == "short-u"

    rep = ex.evaluate_bounds(mesh, (1, 0, 4, 1))
    assert abs(rep.loewner_bound - math.sqrt(2) * 3 ** -0.25 * math.sqrt(rep.area)) < 1e-12
    assert "winner thm13" in rep.text

    su, sv, t13, ta2, nash, winner = ex.a3_prediction(1, 0, 0, 1)
    assert (su, sv, t13, ta2, winner) == (1.0, 1.0, 1.0, 1.0, "tie")
    try:
        ex.a3_prediction(2, 0, 0, 1)
    except RuntimeError:
        pass
    else:
        raise AssertionError("determinant 2 accepted")

    mult, chain = ex.fill_lattice_loop("XYxy")
    assert mult == 1 and len(chain.strip().splitlines()) == 1

    ring = [(math.cos(t), math.sin(t), 0.0) for t in (2 * math.pi * k / 24 for k in range(24))]
    hoop = [(1 + math.cos(t), 0.0, math.sin(t)) for t in (2 * math.pi * k / 24 for k in range(24))]
    assert abs(ex.linking_number(ring, hoop)) == 1

    lk = ex.knot_tube_sharpness(3)[0]
    assert lk == 6, lk

    ok, line = ex.verify_lemma("boundary-squared", cases=50)
    assert ok, line

    try:
        ex.Mesh.parse("garbage")
    except ValueError:
        pass
    else:
        raise AssertionError("garbage mesh accepted")

    print("exsys_py smoke test passed")
    return 0


if __name__ == "__main__":
    sys.exit(main())

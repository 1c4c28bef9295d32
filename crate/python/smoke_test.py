"""Smoke test for the sfcrel extension module. Run after installing the wheel."""

import json
import math

import sfcrel

VNFS = [(k, 0.9, 200.0, 4) for k in ("NAT", "FW", "TM", "WOC", "IDPS")]


def close(a, b, tol=5e-6):
    return math.isclose(a, b, abs_tol=tol)


def main():
    assert close(sfcrel.chain_reliability([0.9] * 5, [0.999]), 0.58990)
    assert sfcrel.subchain_reliability([0.9] * 5, 2, "mmm") > sfcrel.chain_reliability([0.9] * 5)

    web = sfcrel.design_chain(VNFS, 100.0, 0.5, 0.9, setting="mm1", name="web")
    assert web["feasible"] and web["reliability"] >= 0.9 and web["delay"] <= 0.5, web
    assert web["vcpus"] == 20 + web["redundant_vcpus"], web

    try:
        sfcrel.design_chain(VNFS, 100.0, 0.5, 0.9995, host_reliability=0.999)
    except sfcrel.InfeasibleError as e:
        assert e.best["reliability"] < 0.999, e.best
    else:
        raise AssertionError("target above the host ceiling must be infeasible")

    demands, caps = [15, 10, 5, 20, 30], [48, 48, 48]
    mma = sfcrel.place(demands, caps, "mma")
    mdm = sfcrel.place(demands, caps, "mdm")
    exact = sfcrel.place(demands, caps, "exact")
    assert (exact["active_nodes"], mma["active_nodes"], mdm["active_nodes"]) == (2, 2, 3)
    assert mma["assignment"] == [0, 1, 1, 1, 0], mma

    try:
        sfcrel.place([100], [48], "ffd")
    except sfcrel.CapacityError:
        pass
    else:
        raise AssertionError("oversized request must be rejected")

    for bad in (lambda: sfcrel.place([1], [48], "best"), lambda: sfcrel.subchain_reliability([1.5], 1)):
        try:
            bad()
        except ValueError:
            pass
        else:
            raise AssertionError("bad argument accepted")

    ref = json.loads(sfcrel.reference_scenario())
    rows = sfcrel.design_scenario(setting="mmm")
    assert {r["service"] for r in rows} == {s["service_name"] for s in ref["service_catalog"]}

    ref["surprise"] = 1
    try:
        sfcrel.design_scenario(json.dumps(ref))
    except sfcrel.ScenarioError:
        pass
    else:
        raise AssertionError("unknown field accepted")
    assert issubclass(sfcrel.ScenarioError, sfcrel.SfcrelError)

    print("smoke test passed")


if __name__ == "__main__":
    main()

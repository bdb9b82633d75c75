import json

import pytest

from cycmackey.cli import main
from cycmackey.generate import InstanceSpec, make_instance, random_gentle, random_lattice, rng_for
from cycmackey.lattice import augmentation_lattice, regular_lattice
from cycmackey.mackey import h0, h_0, standard_functor
from cycmackey.presenter import present_lattice
from cycmackey.serialize import (dumps, gentle_from_json, gentle_to_json, lattice_from_json,
                                 lattice_to_json, mackey_from_json, mackey_to_json,
                                 presentation_from_json, presentation_to_json)


def _write(tmp_path, name, obj):
    path = tmp_path / name
    path.write_text(dumps(obj) if isinstance(obj, dict) else obj)
    return str(path)


def _run(capsys, argv):
    code = main(argv)
    out = capsys.readouterr()
    return code, (json.loads(out.out) if out.out.strip() else None), out.err


def test_lattice_round_trip():
    rng = rng_for(1)
    for _ in range(5):
        M = random_lattice(rng, 3, 2, 8)
        text = dumps(lattice_to_json(M))
        assert lattice_from_json(json.loads(text)) == M
        assert dumps(lattice_to_json(lattice_from_json(json.loads(text)))) == text


def test_mackey_round_trip():
    M = augmentation_lattice(2, 2)
    for X in (h0(M), h_0(M), standard_functor("B", 3, 2)):
        text = dumps(mackey_to_json(X))
        assert mackey_from_json(json.loads(text)) == X


def test_gentle_round_trip():
    rng = rng_for(2)
    for _ in range(5):
        F = random_gentle(rng, 2, 3)
        assert gentle_from_json(json.loads(dumps(gentle_to_json(F)))) == F


def test_presentation_round_trip():
    pres = present_lattice(augmentation_lattice(3, 1))
    back = presentation_from_json(json.loads(dumps(presentation_to_json(pres))))
    assert back.omega0 == pres.omega0 and back.omega1 == pres.omega1
    assert dumps(presentation_to_json(back)) == dumps(presentation_to_json(pres))


def test_scalars_are_lowest_terms_strings():
    d = lattice_to_json(regular_lattice(2, 1))
    assert all(isinstance(v, str) for row in d["action"] for v in row)


def test_generate_is_deterministic(tmp_path, capsys):
    argv = ["generate", "--kind", "permutation+conjugate", "--p", "2", "--n", "1",
            "--mult", "1,1", "--seed", "7"]
    assert main(argv) == 0
    first = capsys.readouterr().out
    assert main(argv) == 0
    assert capsys.readouterr().out == first
    M = lattice_from_json(json.loads(first))
    assert M.rank == 3
    path = _write(tmp_path, "m.json", first)
    code, out, _ = _run(capsys, ["perm-check", path])
    assert code == 0 and out["multiplicities"] == [1, 1]


def test_generate_trivial(capsys):
    code, out, _ = _run(capsys, ["generate", "--kind", "trivial", "--seed", "1"])
    assert code == 0 and out["action"] == [["1"]]


def test_perm_check_regular_and_augmentation(tmp_path, capsys):
    reg = _write(tmp_path, "reg.json", lattice_to_json(regular_lattice(2, 1)))
    code, out, _ = _run(capsys, ["perm-check", reg])
    assert code == 0 and out["verdict"] and out["multiplicities"] == [0, 1]
    aug = _write(tmp_path, "aug.json", lattice_to_json(make_instance(InstanceSpec(0, 3, 1, "augmentation"))))
    code, out, _ = _run(capsys, ["perm-check", aug])
    assert code == 1 and out["coinvariant_torsion"][0] == [1]


def test_malformed_inputs_exit_2(tmp_path, capsys):
    bad = _write(tmp_path, "bad.json", {"p": 2, "n": 1, "rank": 2, "action": [["1", "x"], ["0"]]})
    assert _run(capsys, ["perm-check", bad])[0] == 2
    junk = _write(tmp_path, "junk.json", "{not json")
    assert _run(capsys, ["perm-check", junk])[0] == 2
    assert _run(capsys, ["perm-check", str(tmp_path / "missing.json")])[0] == 2
    reg = _write(tmp_path, "reg.json", lattice_to_json(regular_lattice(2, 1)))
    assert _run(capsys, ["perm-check", reg, "--p", "3"])[0] == 2
    assert _run(capsys, ["no-such-command"])[0] == 2
    assert _run(capsys, ["gentle", "<x>"])[0] == 2
    assert _run(capsys, ["generate", "--p", "4"])[0] == 2


def test_present_command(tmp_path, capsys):
    aug = _write(tmp_path, "aug.json", lattice_to_json(augmentation_lattice(3, 1)))
    code, out, _ = _run(capsys, ["present", aug])
    assert code == 0 and out["omega0"] == [0, 1] and out["omega1"] == [1, 0] and out["verified"]
    reg = _write(tmp_path, "reg.json", lattice_to_json(regular_lattice(3, 1)))
    code, out, _ = _run(capsys, ["present", reg])
    assert code == 0 and not any(out["omega1"])


def test_present_out_file(tmp_path, capsys):
    aug = _write(tmp_path, "aug.json", lattice_to_json(augmentation_lattice(2, 1)))
    target = tmp_path / "pres.json"
    assert main(["present", aug, "--out", str(target)]) == 0
    assert capsys.readouterr().out == ""
    assert json.loads(target.read_text())["verified"] is True


def test_gentle_command(capsys):
    code, out, _ = _run(capsys, ["gentle", "<>><>>><"])
    assert code == 0 and out["max"] == [1, 4, 8] and out["min"] == [3, 7] and out["exact"]
    code, out, _ = _run(capsys, ["gentle", "<<<<"])
    assert out["projective"] and out["q0"] == [0, 0, 0, 0, 1]
    code, out, _ = _run(capsys, ["gentle", ">>>>"])
    assert out["projective"] and out["q0"] == [1, 0, 0, 0, 0]


def test_tate_and_section_commands(tmp_path, capsys):
    aug = _write(tmp_path, "aug.json", lattice_to_json(augmentation_lattice(2, 1)))
    code, out, _ = _run(capsys, ["tate", aug, "--k", "0", "--degree", "1"])
    assert code == 0 and out["groups"][0]["group"] == {"free": 0, "torsion": [1]}
    code, out, _ = _run(capsys, ["section", aug, "--functor", "h_0"])
    assert code == 0 and all(s["six_term_exact"] for s in out["sections"])
    assert _run(capsys, ["section", aug, "--j", "0"])[0] == 2


def test_mackey_axioms_command(tmp_path, capsys):
    aug = _write(tmp_path, "aug.json", lattice_to_json(augmentation_lattice(3, 1)))
    code, out, _ = _run(capsys, ["mackey-axioms", aug])
    assert code == 0 and out["predicates"]["type_H0"] and not out["predicates"]["hilbert90"]
    T = mackey_to_json(standard_functor("T", 2, 1))
    T["tr"][0] = [["1"]]
    bad = _write(tmp_path, "badT.json", T)
    code, out, _ = _run(capsys, ["mackey-axioms", bad])
    assert code == 1 and "cMF6" in out["violation"]


def test_gldim_witness_command(capsys):
    code, out, _ = _run(capsys, ["gldim-witness", "--p", "2", "--n", "1"])
    assert code == 0 and out["statement"] == "Ext3(B,T) = Z/2"
    assert out["b_resolution_length"] == 3


@pytest.mark.parametrize("kind", ["kernel-of-random-perm-map", "regular", "augmentation"])
def test_generate_kinds_parse_back(kind, capsys):
    code, out, _ = _run(capsys, ["generate", "--kind", kind, "--p", "3", "--n", "2", "--seed", "4"])
    assert code == 0
    lattice_from_json(out)

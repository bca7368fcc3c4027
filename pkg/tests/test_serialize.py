"""JSON round trips and byte stability."""

from __future__ import annotations

from pathlib import Path

from helpers import bag_sig, bag_system, commvec_indexed, commvec_system
from qitbench.serialize import (
    dumps,
    indexed_signature_from_obj,
    indexed_signature_to_obj,
    loads,
    signature_from_obj,
    signature_to_obj,
    system_from_obj,
    system_to_obj,
)

GOLDEN = Path(__file__).parent / "golden"


def test_signature_round_trip():
    sig = bag_sig()
    assert signature_from_obj(loads(dumps(signature_to_obj(sig)))) == sig
    flat = commvec_indexed().flatten()
    assert signature_from_obj(loads(dumps(signature_to_obj(flat)))) == flat


def test_indexed_signature_round_trip():
    isig = commvec_indexed()
    assert indexed_signature_from_obj(loads(dumps(indexed_signature_to_obj(isig)))) == isig


def test_system_round_trip():
    for sys in (bag_system(), commvec_system()):
        assert system_from_obj(loads(dumps(system_to_obj(sys)))) == sys


def test_dump_is_byte_stable_against_golden():
    text = dumps({"signature": signature_to_obj(bag_sig()), "system": system_to_obj(bag_system())})
    golden = (GOLDEN / "bag_system.json").read_text()
    assert text == golden
    # a second dump of freshly built objects is identical
    again = dumps({"signature": signature_to_obj(bag_sig()), "system": system_to_obj(bag_system())})
    assert again == text

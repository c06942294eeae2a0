import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fortifynet.network import (
    DemandTable,
    FortificationParams,
    Link,
    Network,
    NetworkValidationError,
    TntpParseError,
    dump_demand,
    load_demand,
    parse_tntp,
    serialize_tntp,
    sioux_falls,
    sioux_falls_demand,
    sioux_falls_fortification,
    validate,
)


def test_sioux_falls_shape():
    net = sioux_falls()
    assert len(net) == 24
    assert len(net.links) == 76
    first = net.links[0]
    assert (first.tail, first.head, first.free_flow_time) == (1, 2, 6.0)
    assert first.capacity == pytest.approx(25900.20064)


def test_sioux_falls_demand_pairs_and_scale():
    dem = sioux_falls_demand()
    assert sorted({o for o, _ in dem.pairs}) == [1, 2, 3, 13]
    assert sorted({d for _, d in dem.pairs}) == [6, 7, 18, 20]
    assert len(dem.pairs) == 16
    assert dem.demand(1, 6) == 100 * dem.entries[(1, 6)]
    assert dem.total() == pytest.approx(100 * sum(dem.entries.values()))
    assert validate(sioux_falls(), dem) == []


def test_bundled_fortification_is_uniform_with_budget_four():
    fort = sioux_falls_fortification()
    assert fort.budget == 4
    assert set(fort.cost.values()) == {1.0}
    fort.check(sioux_falls())


def test_tntp_round_trip():
    net = sioux_falls()
    assert parse_tntp(serialize_tntp(net)) == net


def test_tntp_bad_row_reports_line():
    text = "<NUMBER OF NODES> 2\n<END OF METADATA>\n~ init_node term_node capacity length free_flow_time ;\n1 2 x 1 1 ;\n"
    with pytest.raises(TntpParseError) as exc:
        parse_tntp(text)
    assert exc.value.lineno == 4


def test_tntp_link_count_mismatch():
    text = "<NUMBER OF NODES> 2\n<NUMBER OF LINKS> 2\n<END OF METADATA>\n1 2 10 1 1 0.15 4 0 0 1 ;\n"
    with pytest.raises(NetworkValidationError):
        parse_tntp(text)


def test_self_loop_and_bad_capacity_rejected():
    with pytest.raises(NetworkValidationError):
        Link(1, 3, 3, 1.0, 1.0)
    with pytest.raises(NetworkValidationError):
        Link(1, 1, 2, 1.0, 0.0)


def test_incident_links_and_removal():
    net = Network([1, 2, 3], [Link(1, 1, 2, 1, 1), Link(2, 2, 3, 1, 1), Link(3, 3, 1, 1, 1)])
    assert net.incident_links(2) == {1, 2}
    sub = net.without_nodes([2])
    assert sub.nodes == (1, 3)
    assert [l.id for l in sub.links] == [3]
    assert 2 not in sub


def test_demand_csv_errors():
    with pytest.raises(ValueError):
        load_demand("")
    with pytest.raises(ValueError, match="duplicate"):
        load_demand("o,d,v\n1,2,3\n1,2,4\n")
    with pytest.raises(ValueError, match="negative"):
        load_demand("o,d,v\n1,2,-3\n")


def test_validate_flags_disconnected_pair():
    net = Network([1, 2, 3], [Link(1, 1, 2, 1, 1)])
    findings = validate(net, DemandTable({(1, 3): 1.0, (1, 9): 1.0}, 1.0))
    assert {f.message for f in findings} == {"OD pair disconnected", "unknown destination"}


def test_fortification_checks():
    net = Network([1, 2], [Link(1, 1, 2, 1, 1)])
    with pytest.raises(ValueError):
        FortificationParams({1: 1.0}, 1).check(net)
    with pytest.raises(ValueError):
        FortificationParams({1: 1.0, 2: 1.0}, 3).check(net)
    fort = FortificationParams({1: 1.0, 2: 2.0}, 1)
    assert FortificationParams.from_json(fort.to_json()) == fort


@settings(max_examples=50, deadline=None)
@given(st.dictionaries(st.tuples(st.integers(1, 9), st.integers(1, 9)), st.integers(0, 1000), max_size=8),
       st.sampled_from([1.0, 10.0, 100.0]))
def test_demand_round_trip(entries, scale):
    dem = DemandTable({k: float(v) for k, v in entries.items()}, scale)
    back = load_demand(dump_demand(dem), scale)
    assert back == dem
    assert back.total() == pytest.approx(scale * sum(entries.values()))

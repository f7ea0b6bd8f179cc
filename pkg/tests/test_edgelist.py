import numpy as np
import pytest

from weightwalk.edgelist import parse_edge_list, write_edge_list
from weightwalk.errors import ParseError, RejectedEdge
from weightwalk.generators import gen_er
from weightwalk.graph import node_stats


def write(tmp_path, text, name="edges.txt"):
    p = tmp_path / name
    p.write_text(text)
    return p


def test_single_tab_row(tmp_path):
    g = parse_edge_list(write(tmp_path, "a\tb\t1.5\n"))
    assert g.node_count == 2
    assert g.edge_count == 1
    assert g.edges_w[0] == 1.5
    assert g.labels == ("a", "b")


def test_comma_and_whitespace_autodetect(tmp_path):
    g = parse_edge_list(write(tmp_path, "x,y,2.0\ny,z,3.0\n"))
    assert g.edge_count == 2
    g = parse_edge_list(write(tmp_path, "x y 2.0\ny z 3.0\n", name="sp.txt"))
    assert g.edge_count == 2


def test_comments_ignored(tmp_path):
    g = parse_edge_list(write(tmp_path, "# generated by a tool\n# another note\n0\t1\t1.0\n"))
    assert g.edge_count == 1


def test_header_selects_weight_column(tmp_path):
    text = "source,target,length,weight\na,b,9.0,0.25\nb,c,8.0,0.5\n"
    g = parse_edge_list(write(tmp_path, text))
    assert g.edges_w.tolist() == [0.25, 0.5]
    g2 = parse_edge_list(write(tmp_path, text, name="e2.txt"), weight_column="length")
    assert g2.edges_w.tolist() == [9.0, 8.0]


def test_commented_header(tmp_path):
    g = parse_edge_list(write(tmp_path, "# source target weight\n0 1 0.7\n"))
    assert g.edges_w[0] == 0.7


def test_missing_weight_column_fails_loudly(tmp_path):
    with pytest.raises(ParseError, match="no column named"):
        parse_edge_list(write(tmp_path, "source,target,cost\na,b,1.0\n"))
    with pytest.raises(ParseError, match="no weight column"):
        parse_edge_list(write(tmp_path, "a\tb\n", name="e2.txt"))


def test_duplicate_policy_sum(tmp_path):
    g = parse_edge_list(write(tmp_path, "a\tb\t1.0\na\tb\t2.0\n"))
    assert g.edge_count == 1
    assert g.edges_w[0] == 3.0


def test_duplicate_policy_reject(tmp_path):
    with pytest.raises(RejectedEdge, match="duplicate ordered pair"):
        parse_edge_list(write(tmp_path, "a\tb\t1.0\na\tb\t2.0\n"), duplicate_policy="reject")


@pytest.mark.parametrize("policy,expected", [("sum", 3.0), ("max", 2.0), ("mean", 1.5)])
def test_directed_collapse(tmp_path, policy, expected):
    g = parse_edge_list(write(tmp_path, "a\tb\t1.0\nb\ta\t2.0\n"), directed_collapse=policy)
    assert g.edge_count == 1
    assert g.edges_w[0] == expected


def test_zero_weight_epsilon(tmp_path):
    p = write(tmp_path, "a\tb\t0.0\nb\tc\t1.0\n")
    with pytest.raises(RejectedEdge):
        parse_edge_list(p)
    g = parse_edge_list(p, zero_weight_epsilon=1e-12)
    assert g.edges_w[0] == 1e-12


def test_bad_weight_reports_line(tmp_path):
    with pytest.raises(ParseError, match=":2:"):
        parse_edge_list(write(tmp_path, "a\tb\t1.0\na\tc\tfoo\n"))


def test_empty_file(tmp_path):
    with pytest.raises(ParseError, match="no edge rows"):
        parse_edge_list(write(tmp_path, "# only comments\n"))


def test_self_loop_rejected(tmp_path):
    with pytest.raises(RejectedEdge, match="self-loop"):
        parse_edge_list(write(tmp_path, "a\ta\t1.0\n"))


def test_largest_component(tmp_path):
    text = "a\tb\t1.0\nb\tc\t1.0\nx\ty\t1.0\n"
    g = parse_edge_list(write(tmp_path, text), largest_component=True)
    assert g.node_count == 3
    assert g.edge_count == 2
    assert set(g.labels) == {"a", "b", "c"}


def test_labels_interned_in_first_appearance_order(tmp_path):
    g = parse_edge_list(write(tmp_path, "zebra\tapple\t1.0\napple\tmango\t2.0\n"))
    assert g.labels == ("zebra", "apple", "mango")


def test_roundtrip_generate_write_parse(tmp_path):
    g = gen_er(64, 6, "exponential", seed=50)
    path = tmp_path / "er.tsv"
    write_edge_list(g, path)
    g2 = parse_edge_list(path)
    assert g2.node_count == g.node_count
    assert g2.edge_count == g.edge_count
    orig = sorted(zip(g.edges_u.tolist(), g.edges_v.tolist(), g.edges_w.tolist()))
    back_labels = [(int(g2.labels[u]), int(g2.labels[v]), w)
                   for u, v, w in zip(g2.edges_u, g2.edges_v, g2.edges_w.tolist())]
    back = sorted((min(a, b), max(a, b), w) for a, b, w in back_labels)
    for (u1, v1, w1), (u2, v2, w2) in zip(orig, back):
        assert (u1, v1) == (u2, v2)
        assert w1 == pytest.approx(w2, rel=1e-9)
    assert np.allclose(node_stats(g).strength,
                       sorted_strengths(g2), rtol=1e-9)


def sorted_strengths(g2):
    # map label ids back to original integer ids
    s = node_stats(g2).strength
    out = np.zeros_like(s)
    for i, lab in enumerate(g2.labels):
        out[int(lab)] = s[i]
    return out


def test_write_with_labels(tmp_path):
    g = parse_edge_list(write(tmp_path, "a\tb\t1.0\n"))
    out = tmp_path / "out.tsv"
    write_edge_list(g, out, use_labels=True)
    assert out.read_text() == "a\tb\t1.0\n"

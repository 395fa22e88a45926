import json

import numpy as np
import pytest

from sicode.channel import from_string
from sicode.encoder import (PSI, RowPermutation, SiConfig, bit_layout, decode_noiseless, deinterleave, encode_all,
                            interleave, map_bases, metadata_for, pack_codewords, padding_bits, psi, psi_inv,
                            read_fasta, shift, shift_mask, transmission_rate, unpack_codewords, write_fasta)

EX2 = SiConfig(m=4, s=2, d=1, L=3, t1=(0, 1, 2, 3), t2=(0, 1, 2, 3))


def test_psi_table():
    assert [psi(0, 0), psi(0, 1), psi(1, 0), psi(1, 1)] == list(from_string("ACTG"))
    for b1 in (0, 1):
        for b2 in (0, 1):
            v = psi(b1, b2)
            assert psi_inv(v, 1) == b1 and psi_inv(v, 2) == b2


def test_config_derived_sizes():
    cfg = SiConfig(10, 10, 100, 20, tuple(range(10)), tuple(range(9, -1, -1)))
    assert (cfg.n, cfg.N, cfg.t_max, cfg.L_prime, cfg.n_columns) == (100, 10000, 9, 29, 2900)


def test_config_validation():
    with pytest.raises(ValueError):
        SiConfig(4, 2, 1, 3, (0, 1, 2), (0, 1, 2, 3))
    with pytest.raises(ValueError):
        SiConfig(4, 2, 1, 3, (0, 1, 3, 3), (0, 1, 2, 3))  # no row with shift 2
    with pytest.raises(ValueError):
        SiConfig(0, 2, 1, 3)
    SiConfig(4, 2, 1, 3, (0, 1, 3, 3), (0, 1, 2, 3), check_shift_classes=False)


def test_rate_formula():
    cfg = SiConfig(4, 1, 1, 3, (0, 1, 2, 3), (3, 2, 1, 0))
    assert transmission_rate(cfg, 0.5, 0.5) == 0.5


def test_pack_trivial():
    cfg = SiConfig(1, 1, 1, 2)
    assert pack_codewords([[0], [1]], cfg).tolist() == [[0, 1]]


def test_pack_block_positions(rng):
    cfg = SiConfig(3, 2, 4, 5)
    cw = rng.integers(0, 2, (5, cfg.N), dtype=np.uint8)
    packed = pack_codewords(cw, cfg)
    sd = cfg.s * cfg.d
    for j in range(cfg.L):
        for i in range(cfg.m):
            block = packed[i * cfg.s:(i + 1) * cfg.s, j * cfg.d:(j + 1) * cfg.d]
            assert np.array_equal(block.ravel(), cw[j, i * sd:(i + 1) * sd])
    assert np.array_equal(unpack_codewords(packed, cfg), cw)


def test_pack_rejects_wrong_shape():
    with pytest.raises(ValueError):
        pack_codewords(np.zeros((2, 5)), SiConfig(1, 1, 1, 2))


def test_bit_layout_matches_packing(rng):
    cfg = SiConfig(3, 2, 4, 1)
    cw = rng.integers(0, 2, (1, cfg.N), dtype=np.uint8)
    packed = pack_codewords(cw, cfg)
    _, row, col = bit_layout(cfg)
    assert np.array_equal(packed[row, col], cw[0])


def test_staircase_occupancy():
    cfg = SiConfig(4, 1, 1, 3, (0, 1, 2, 3), (0, 1, 2, 3))
    occupied = ~shift_mask(cfg, 1)
    expected = np.array([[1, 1, 1, 0, 0, 0],
                         [0, 1, 1, 1, 0, 0],
                         [0, 0, 1, 1, 1, 0],
                         [0, 0, 0, 1, 1, 1]], dtype=bool)
    assert np.array_equal(occupied, expected)


def test_staircase_content(rng):
    cfg = SiConfig(4, 1, 1, 3, (0, 1, 2, 3), (0, 1, 2, 3))
    cw = rng.integers(0, 2, (3, 4), dtype=np.uint8)
    m = shift(pack_codewords(cw, cfg), cfg.t1, cfg, 1)
    for i in range(4):
        for j in range(3):
            assert m.bits[i, i + j] == cw[j, i]


def test_zero_shifts_no_padding(rng):
    cfg = SiConfig(3, 2, 2, 4)
    packed = pack_codewords(rng.integers(0, 2, (4, cfg.N), dtype=np.uint8), cfg)
    m = shift(packed, cfg.t1, cfg, 1)
    assert not m.padding_mask.any() and np.array_equal(m.bits, packed)
    assert cfg.L_prime == cfg.L


def test_padding_is_seeded():
    cfg = SiConfig(4, 2, 3, 3, (0, 1, 2, 3), (3, 2, 1, 0))
    assert np.array_equal(padding_bits(cfg, 1), padding_bits(cfg, 1))
    assert not np.array_equal(padding_bits(cfg, 1), padding_bits(cfg, 2))
    other = cfg.with_shifts(cfg.t1, cfg.t2, padding_seed=1)
    assert not np.array_equal(padding_bits(cfg, 1), padding_bits(other, 1))


def test_all_zero_maps_to_all_a():
    cfg = SiConfig(2, 1, 2, 1)
    m = shift(np.zeros((2, 2), np.uint8), cfg.t1, cfg, 1)
    assert not map_bases(m, m).any()


def test_dispersed_row_order():
    assert (RowPermutation.for_config(EX2).forward + 1).tolist() == [1, 3, 5, 7, 2, 4, 6, 8]


def test_stride_row_order_behind_switch():
    cfg = EX2.with_shifts(EX2.t1, EX2.t2, permutation="stride")
    assert (RowPermutation.for_config(cfg).forward + 1).tolist() == [1, 5, 2, 6, 3, 7, 4, 8]


@pytest.mark.parametrize("m,s", [(1, 5), (5, 1), (4, 2), (3, 7)])
@pytest.mark.parametrize("mode", ["dispersed", "stride"])
def test_permutation_bijective(m, s, mode, rng):
    cfg = SiConfig(m, s, 1, 1, permutation=mode)
    p = RowPermutation.for_config(cfg)
    assert sorted(p.forward.tolist()) == list(range(m * s))
    assert np.array_equal(p.forward[p.inverse], np.arange(m * s))
    if m == 1 or s == 1:
        assert np.array_equal(p.forward, np.arange(m * s))
    x = rng.integers(0, 4, (m * s, 6))
    assert np.array_equal(deinterleave(interleave(x, cfg), cfg), x)


def test_marker_rows_in_full_column():
    meta = metadata_for(EX2)
    known = meta.m1.padding_mask & meta.m2.padding_mask
    x_known = interleave(known, EX2)
    assert (np.flatnonzero(x_known[:, 2]) + 1).tolist() == [4, 8]


def test_dispersion(rng):
    cfg = SiConfig(4, 3, 2, 3, (0, 1, 2, 3), (3, 2, 1, 0))
    block_row = np.repeat(np.arange(cfg.m), cfg.s)[:, None] * np.ones((1, cfg.n_columns), int)
    xr = interleave(block_row, cfg)
    for i in range(cfg.s):
        for col in range(cfg.n_columns):
            assert sorted(xr[i * cfg.m:(i + 1) * cfg.m, col].tolist()) == list(range(cfg.m))


def test_full_pipeline_round_trip(rng):
    cfg = SiConfig(4, 2, 3, 5, (0, 1, 2, 3), (3, 2, 1, 0))
    c1 = rng.integers(0, 2, (5, cfg.N), dtype=np.uint8)
    c2 = rng.integers(0, 2, (5, cfg.N), dtype=np.uint8)
    x, meta = encode_all(c1, c2, cfg)
    assert x.shape == (cfg.n, cfg.n_columns)
    assert (~meta.m1.padding_mask).sum() + (~meta.m2.padding_mask).sum() == 2 * cfg.L * cfg.N
    d1, d2 = decode_noiseless(x, cfg)
    assert np.array_equal(d1, c1) and np.array_equal(d2, c2)


def test_degenerate_single_codeword(rng):
    cfg = SiConfig(1, 1, 4, 1)
    c1 = rng.integers(0, 2, (1, 4), dtype=np.uint8)
    c2 = rng.integers(0, 2, (1, 4), dtype=np.uint8)
    x, _ = encode_all(c1, c2, cfg)
    assert np.array_equal(x[0], PSI[c1[0], c2[0]])


def test_receiver_metadata_matches_transmitter(rng):
    cfg = SiConfig(4, 2, 3, 5, (0, 1, 2, 3), (3, 2, 1, 0))
    _, meta = encode_all(rng.integers(0, 2, (5, cfg.N)), rng.integers(0, 2, (5, cfg.N)), cfg)
    rx = metadata_for(cfg)
    for u in (1, 2):
        a, b = meta.intermediate(u), rx.intermediate(u)
        assert np.array_equal(a.padding_mask, b.padding_mask)
        assert np.array_equal(a.bits[a.padding_mask], b.bits[b.padding_mask])
    doc = json.loads(meta.to_json())
    assert doc["t_max"] == 3 and doc["permutation_forward"] == meta.permutation.forward.tolist()
    assert doc["padding_mask_1"][0] == [[15, 24]]  # groups 5..7 of width d=3


def test_fasta_round_trip(tmp_path, rng):
    x = rng.integers(0, 4, (8, 5)).astype(np.int8)
    write_fasta(x, tmp_path / "x.fa")
    seqs = read_fasta(tmp_path / "x.fa")
    assert np.array_equal(np.array([from_string(s) for s in seqs]).T, x)

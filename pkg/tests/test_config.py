import pytest
from hypothesis import given
from hypothesis import strategies as st

from mimo_mccdma.config import CONFIG_KEYS, ConfigError, load_config, parse_config, serialize_config
from mimo_mccdma.link import LinkConfig


def test_empty_file_gives_defaults():
    cfg = parse_config("")
    assert cfg == LinkConfig()
    assert (cfg.subcarriers, cfg.cp_len, cfg.snr_start_db, cfg.snr_stop_db) == (64, 12, -10.0, 20.0)
    assert cfg.generators == (0o15, 0o17) and cfg.spreading_factor == 8 and cfg.rx_antennas == 3


def test_paper_profile():
    cfg = parse_config("profile = paper\n")
    assert (cfg.subcarriers, cfg.cp_len) == (6400, 1280)
    assert parse_config("profile = paper\nsubcarriers = 128\ncp_len = 16").subcarriers == 128


def test_grammar():
    text = """
    # a comment
    modulation = 16-QAM   # trailing comment
    pn_taps = 211
    conv_generators = 15,17
    coding = off
    max_bits = 1e6
    """
    cfg = parse_config(text)
    assert cfg.modulation == "QAM16" and cfg.pn_taps == 0o211 and not cfg.coding and cfg.max_bits == 10**6


def test_roundtrip_is_byte_stable():
    cfg = parse_config("modulation = QPSK\n")
    text = serialize_config(cfg)
    assert "modulation = QPSK\n" in text
    assert serialize_config(parse_config(text)) == text
    assert [line.split(" = ")[0] for line in text.splitlines()] == list(CONFIG_KEYS)


@given(
    st.sampled_from(["QPSK", "PSK8", "QAM8", "QAM16", "QAM32", "QAM64"]),
    st.integers(1, 2),
    st.integers(1, 4),
    st.floats(-20, 5, allow_nan=False).map(lambda x: round(x, 3)),
    st.booleans(),
    st.integers(0, 2**31),
)
def test_roundtrip_property(mod, tx, rx, start, coding, seed):
    cfg = LinkConfig(modulation=mod, tx_antennas=tx, rx_antennas=rx, snr_start_db=start, coding=coding, seed=seed)
    assert parse_config(serialize_config(cfg)) == cfg


@pytest.mark.parametrize(
    "text, key, line, message",
    [
        ("subcarriers = 64\ncp_len = 9999\n", "cp_len", 2, "cp_len must be < subcarriers"),
        ("modulation = QPSK\nbogus = 1\n", "bogus", 2, "unknown key"),
        ("users = two\n", "users", 1, "cannot parse"),
        ("seed = 1\nseed = 2\n", "seed", 2, "duplicate key"),
        ("\n\nmax_bits = 100\n", "max_bits", 3, "max_bits"),
        ("pn_seed = 0\n", "pn_seed", 1, "degenerate"),
        ("modulation = QAM128\n", "modulation", 1, "unknown modulation"),
        ("just text\n", None, 1, "key = value"),
    ],
)
def test_errors_name_key_and_line(text, key, line, message):
    with pytest.raises(ConfigError, match=message) as info:
        parse_config(text)
    assert info.value.key == key
    assert info.value.line == line


def test_load_with_overrides(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text("modulation = QAM64\nseed = 3\n", encoding="utf-8")
    cfg = load_config(path, {"seed": 9})
    assert cfg.modulation == "QAM64" and cfg.seed == 9

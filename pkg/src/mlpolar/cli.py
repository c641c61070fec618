"""Command line: ``mlpolar {fig1,fig2,fig3,design,simulate,encode,decode}``.

Every verb reads an optional flat ``key=value`` config file (``--config``)
and then ``key=value`` overrides given as positional arguments.

Exit codes: 0 success, 1 configuration error, 2 infeasible design.
"""
import argparse
import sys

import numpy as np

from . import harness, mlc
from .channels import ask_constellation, ebno_to_sigma
from .harness import ConfigError, DesignError
from .sbp import labeling_by_name

VERBS = ("fig1", "fig2", "fig3", "design", "simulate", "encode", "decode")


def _read_settings(path, overrides):
    settings = {}
    if path:
        try:
            with open(path) as fh:
                text = fh.read()
        except OSError as exc:
            raise ConfigError(str(exc)) from exc
        for lineno, line in enumerate(text.splitlines(), 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected key=value")
            k, v = line.split("=", 1)
            settings[k.strip()] = v.strip()
    for item in overrides:
        if "=" not in item:
            raise ConfigError(f"override {item!r} is not key=value")
        k, v = item.split("=", 1)
        settings[k.strip()] = v.strip()
    return settings


class _Settings:
    """Typed access to string settings; unknown keys are reported."""

    def __init__(self, raw, allowed):
        unknown = set(raw) - set(allowed)
        if unknown:
            raise ConfigError(f"unknown key(s): {', '.join(sorted(unknown))}")
        self.raw = raw

    def get(self, key, default=None, cast=str):
        if key not in self.raw:
            if default is None:
                raise ConfigError(f"missing required key {key!r}")
            return default
        try:
            return cast(self.raw[key])
        except ValueError as exc:
            raise ConfigError(f"bad value for {key}: {self.raw[key]!r}") from exc

    def get_list(self, key, default, cast=float):
        if key not in self.raw:
            return list(default)
        try:
            return [cast(v) for v in self.raw[key].split(",") if v.strip()]
        except ValueError as exc:
            raise ConfigError(f"bad list for {key}: {self.raw[key]!r}") from exc


def _int(text):
    return int(float(text))


def _emit(text, output):
    if output:
        with open(output, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _cmd_fig1(s):
    table = harness.fig1_data(s.get_list("n", harness.FIG1_N, _int),
                              s.get_list("epsilon", harness.FIG1_EPS))
    return table.to_csv()


def _cmd_fig2(s):
    table = harness.fig2_data(s.get_list("m", (2, 4, 8), _int),
                              s.get_list("labelings", ("SP", "GRAY"), str),
                              s.get_list("esn0", harness.FIG2_SNR),
                              samples=s.get("samples", 200_000, _int),
                              seed=s.get("seed", 0, _int),
                              method=s.get("method", "mc"))
    return table.to_csv()


def _cmd_fig3(s):
    table = harness.fig3_data(s.get_list("mN", (512, 2048, 8192, 32768), _int),
                              s.get_list("labelings", ("SP", "GRAY"), str),
                              s.get("target_wer", 1e-5, float),
                              s.get_list("rates", harness.FIG3_RATES),
                              m=s.get("m", 4, _int))
    return table.to_csv()


def _cmd_design(s):
    m = s.get("m", 1, _int)
    n = s.get("n", cast=_int)
    N = 2 ** n
    K = s.get("K", -1, _int)
    if K < 0:
        K = int(round(s.get("rate", cast=float) * N))
    if not 0 <= K <= m * N:
        raise DesignError(f"K={K} infeasible for m={m}, N={N}")
    if K == 0 and "sigma" not in s.raw:
        raise DesignError("rate zero: give sigma explicitly")
    sigma = s.get("sigma", -1.0, float)
    if sigma <= 0:
        sigma = ebno_to_sigma(s.get("ebno", cast=float), K / N)
    code = mlc.design(ask_constellation(m), labeling_by_name(s.get("labeling", "SP"), m),
                      n, K, sigma)
    return mlc.design_to_text(code)


def _load_code(s):
    path = s.get("code")
    try:
        with open(path) as fh:
            return mlc.design_from_text(fh.read())
    except OSError as exc:
        raise ConfigError(str(exc)) from exc
    except (KeyError, ValueError) as exc:
        raise ConfigError(f"{path}: {exc}") from exc


def _read_values(s, key):
    text = s.get(key)
    try:
        with open(text) as fh:
            text = fh.read()
    except OSError:
        pass
    return text.replace(",", " ").split()


def _cmd_encode(s):
    code = _load_code(s)
    bits = [b for tok in _read_values(s, "bits") for b in tok]
    if any(b not in "01" for b in bits) or len(bits) != code.K:
        raise ConfigError(f"need exactly {code.K} bits of 0/1")
    symbols = mlc.ml_encode(code, np.array(bits, dtype=np.uint8))
    return "".join(f"{float(x)!r}\n" for x in symbols)


def _cmd_decode(s):
    code = _load_code(s)
    try:
        y = np.array([float(v) for v in _read_values(s, "received")])
    except ValueError as exc:
        raise ConfigError("received values must be numbers") from exc
    if y.size != code.N:
        raise ConfigError(f"need exactly {code.N} received values")
    sigma = s.get("sigma", -1.0, float)
    if sigma <= 0:
        sigma = ebno_to_sigma(s.get("ebno", cast=float), code.rate)
    info, _ = mlc.msd_decode(code, y, sigma)
    return "".join(str(int(b)) for b in info) + "\n"


def _cmd_simulate(raw):
    config = harness.config_from_dict(raw)
    records = harness.run_simulation(config)
    return harness.simulation_table(config, records).to_csv()


_KEYS = {
    "fig1": ("n", "epsilon"),
    "fig2": ("m", "labelings", "esn0", "samples", "seed", "method"),
    "fig3": ("mN", "labelings", "target_wer", "rates", "m"),
    "design": ("m", "labeling", "n", "K", "rate", "ebno", "sigma"),
    "encode": ("code", "bits"),
    "decode": ("code", "received", "sigma", "ebno"),
}
_HANDLERS = {"fig1": _cmd_fig1, "fig2": _cmd_fig2, "fig3": _cmd_fig3, "design": _cmd_design,
             "encode": _cmd_encode, "decode": _cmd_decode}


def build_parser():
    parser = argparse.ArgumentParser(prog="mlpolar", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="verb", required=True)
    for verb in VERBS:
        p = sub.add_parser(verb)
        p.add_argument("--config", help="flat key=value config file")
        p.add_argument("-o", "--output", help="write output here instead of stdout")
        p.add_argument("overrides", nargs="*", metavar="key=value")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        raw = _read_settings(args.config, args.overrides)
        if args.verb == "simulate":
            text = _cmd_simulate(raw)
        else:
            text = _HANDLERS[args.verb](_Settings(raw, _KEYS[args.verb]))
        _emit(text, args.output)
    except DesignError as exc:
        print(f"mlpolar: infeasible design: {exc}", file=sys.stderr)
        return 2
    except (ConfigError, ValueError) as exc:
        print(f"mlpolar: configuration error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())

"""Command-line front end: evaluation, q-expansions, verification, caching.

Every command emits either JSON (default) or text on standard output.
JSON documents embed the request fields they were produced from, so any
emitted document can be fed back through ``--from-json``; explicit flags
override fields taken from such a document.  Malformed input exits with
code 2 and a message naming the offending field; a failing verification
or annihilation check exits with code 1.
"""

from __future__ import annotations

import json
import math
from fractions import Fraction

import click
import numpy as np

from .cache import CoefficientCache, resolve_cache_dir
from .diffops import OperatorSpec, StencilConfig, apply_operator, check_annihilation
from .jsonio import (
    dumps,
    parse_complex,
    parse_fraction,
    parse_matrix,
    parse_vector,
    qseries_from_jsonable,
    to_jsonable,
)
from .lattice import analyze_lattice, lattice, validate_compatible_pair
from .mu import mu_hat_ml, mu_two_var, splitting_residual
from .qseries import format_qseries
from .specfun import DEFAULT_PREC, Precision, theta_definite
from .theta import ThetaSpec, holomorphic_part_qexp, theta_indef_components, theta_indef_eval
from .verify import SUITE_IDS, exit_code, generate_report, render_text, run_all, run_suite

__all__ = ["main", "CliConfig", "InputError"]


class InputError(click.ClickException):
    """Malformed input: reported on the diagnostic stream, exit code 2."""

    exit_code = 2


class CliConfig:
    """Validated per-invocation settings shared by the subcommands."""

    def __init__(self, eps=None, fmt="json", cache_dir=None, cache_enabled=True):
        if eps is not None:
            eps = float(eps)
            if not 0.0 < eps <= 1e-3:
                raise InputError(f"eps: must lie in (0, 1e-3], got {eps!r}")
        self.eps = eps
        if fmt not in ("json", "text"):
            raise InputError(f"format: expected 'json' or 'text', got {fmt!r}")
        self.fmt = fmt
        self.cache_dir = resolve_cache_dir(cache_dir)
        self.cache_enabled = cache_enabled

    def precision(self) -> Precision:
        if self.eps is None:
            return DEFAULT_PREC
        digits = max(24, 2 * math.ceil(-math.log10(self.eps)) + 4)
        return Precision(digits=digits, eps=self.eps)

    def cache(self) -> CoefficientCache | None:
        if not self.cache_enabled:
            return None
        cache = CoefficientCache(self.cache_dir)
        try:
            cache.directory.mkdir(parents=True, exist_ok=True)
        except OSError as exc:
            click.echo(f"warning: cache disabled, {exc}", err=True)
            return None
        return cache


def _wrap_value_error(fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except ValueError as exc:
        raise InputError(str(exc)) from exc


def _parse_inline(text: str, field: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"{field}: invalid JSON: {exc}") from exc


def _read_doc(path: str):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise InputError(f"from-json: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"from-json: invalid JSON in {path}: {exc}") from exc
    if not isinstance(doc, dict):
        raise InputError("from-json: expected a JSON object")
    return doc


def _merge_request(from_json: str | None, **flags) -> dict:
    """Request fields: the ``--from-json`` document overridden by any
    explicitly supplied flags (unset flags are ``None``)."""
    request = _read_doc(from_json) if from_json else {}
    for key, value in flags.items():
        if value is not None:
            request[key] = value
    return request


def _need(request: dict, field: str):
    value = request.get(field)
    if value is None:
        raise InputError(f"{field}: required but not given")
    return value


def _emit(doc: dict, cfg: CliConfig, text_lines=None):
    if cfg.fmt == "json":
        click.echo(dumps(doc), nl=False)
    else:
        lines = text_lines() if callable(text_lines) else text_lines
        click.echo("\n".join(lines) if lines else dumps(doc), nl=True)


def _cert_dict(cert) -> dict:
    return {
        "tail_bound": cert.bound,
        "radius": cert.radius,
        "terms": cert.terms,
        "note": cert.note,
    }


def _fmt_complex(z: complex) -> str:
    return f"{z.real:.12g} {'+' if z.imag >= 0 else '-'} {abs(z.imag):.12g}i"


# ---------------------------------------------------------------------------
# shared builders


def _build_lattice(request: dict):
    gram = _wrap_value_error(parse_matrix, _need(request, "gram"), "gram")
    mode = request.get("mode", "gram")
    return _wrap_value_error(lattice, gram, mode), gram, mode


def _build_theta_spec(request: dict):
    lat, gram, mode = _build_lattice(request)
    e_rows = _wrap_value_error(parse_matrix, _need(request, "e"), "e")
    ep_rows = _wrap_value_error(parse_matrix, _need(request, "eprime"), "eprime")
    for field, rows in (("e", e_rows), ("eprime", ep_rows)):
        for i, row in enumerate(rows):
            if len(row) != lat.rank:
                raise InputError(f"{field}[{i}]: expected {lat.rank} coordinates")
            if lat.q(row) > 0:
                raise InputError(
                    f"{field}[{i}]: positive frame vector (norm must be negative or zero)"
                )
    kernel = request.get("kernel", "default")
    if kernel not in ("default", "sgn"):
        raise InputError(f"kernel: expected 'default' or 'sgn', got {kernel!r}")
    pair = _wrap_value_error(validate_compatible_pair, lat, e_rows, ep_rows)
    spec = _wrap_value_error(ThetaSpec, pair, None if kernel == "default" else "sgn")
    fields = {"gram": gram, "mode": mode, "e": e_rows, "eprime": ep_rows, "kernel": kernel}
    return lat, spec, fields


def _parse_point(request: dict):
    tau = _wrap_value_error(parse_complex, _need(request, "tau"), "tau")
    zval = _need(request, "z")
    if not isinstance(zval, (list, tuple)):
        zval = [zval]
    z = tuple(_wrap_value_error(parse_complex, w, f"z[{i}]") for i, w in enumerate(zval))
    return tau, z


# ---------------------------------------------------------------------------
# command tree


def _format_options(fn):
    fn = click.option("--format", "fmt", type=click.Choice(["json", "text"]),
                      default=None, help="Output format (default json).")(fn)
    return fn


def _eps_option(fn):
    return click.option("--eps", type=float, default=None,
                        help="Target accuracy in (0, 1e-3].")(fn)


def _cfg(fmt=None, eps=None, cache_dir=None, no_cache=False) -> CliConfig:
    return CliConfig(eps=eps, fmt=fmt or "json", cache_dir=cache_dir,
                     cache_enabled=not no_cache)


@click.group()
@click.version_option(package_name="mjforms")
def main():
    """Lattices, indefinite theta series, mu-functions, covariant
    operators, and verification suites."""


# -- lattice ----------------------------------------------------------------


@main.group("lattice")
def lattice_group():
    """Exact lattice invariants."""


@lattice_group.command("analyze")
@click.option("--inline", help="Gram matrix as inline JSON, e.g. '[[3,4],[4,3]]'.")
@click.option("--from-json", "from_json", type=click.Path(), help="Request document.")
@click.option("--mode", type=click.Choice(["gram", "paper-L"]), default=None,
              help="Whether the matrix is the canonical Gram matrix or half of it.")
@_format_options
def lattice_analyze(inline, from_json, mode, fmt):
    """Signature, determinant, parity, and discriminant-group order."""
    cfg = _cfg(fmt)
    request = _merge_request(
        from_json,
        gram=_parse_inline(inline, "inline") if inline else None,
        mode=mode,
    )
    lat, gram, mode = _build_lattice(request)
    analysis = analyze_lattice(lat)
    doc = {
        "schema": "lattice-analysis/1",
        "gram": gram,
        "mode": mode,
        "rank": lat.rank,
        "signature": list(analysis.signature),
        "det": analysis.det,
        "even_integral": lat.is_even_integral(),
        "disc_order": analysis.disc_order,
        "radical_rank": len(analysis.radical_basis),
    }
    _emit(doc, cfg, lambda: [
        f"rank = {lat.rank}",
        f"signature = {analysis.signature}",
        f"det = {analysis.det}",
        f"even integral = {lat.is_even_integral()}",
        f"disc order = {analysis.disc_order}",
        f"radical rank = {len(analysis.radical_basis)}",
    ])


# -- theta ------------------------------------------------------------------


def _theta_common(fn):
    for opt in (
        click.option("--gram", help="Matrix as inline JSON."),
        click.option("--mode", type=click.Choice(["gram", "paper-L"]), default=None),
        click.option("--e", "e_rows", help="Rows of the first frame, inline JSON."),
        click.option("--eprime", "ep_rows", help="Rows of the second frame, inline JSON."),
        click.option("--kernel", type=click.Choice(["default", "sgn"]), default=None,
                     help="Kernel policy: smooth completion or sign limits."),
        click.option("--from-json", "from_json", type=click.Path()),
    ):
        fn = opt(fn)
    return fn


@main.group("theta")
def theta_group():
    """Indefinite theta series."""


@theta_group.command("eval")
@_theta_common
@click.option("--tau", help="Point on the upper half plane, e.g. '0.1+0.9j'.")
@click.option("--z", "z_inline", help="Elliptic variable(s), inline JSON list.")
@click.option("--shift", help="Component shift, inline JSON list of rationals.")
@_eps_option
@_format_options
def theta_eval(gram, mode, e_rows, ep_rows, kernel, from_json, tau, z_inline, shift, eps, fmt):
    """Numeric value of one component at (tau, z)."""
    cfg = _cfg(fmt, eps)
    request = _merge_request(
        from_json,
        gram=_parse_inline(gram, "gram") if gram else None,
        mode=mode,
        e=_parse_inline(e_rows, "e") if e_rows else None,
        eprime=_parse_inline(ep_rows, "eprime") if ep_rows else None,
        kernel=kernel,
        tau=tau,
        z=_parse_inline(z_inline, "z") if z_inline else None,
        shift=_parse_inline(shift, "shift") if shift else None,
    )
    _lat, spec, fields = _build_theta_spec(request)
    tau_c, z_c = _parse_point(request)
    shift_v = None
    if request.get("shift") is not None:
        shift_v = _wrap_value_error(parse_vector, request["shift"], "shift")
    value, cert = _wrap_value_error(
        theta_indef_eval, spec, tau_c, z_c, cfg.precision(),
        shift=shift_v, with_certificate=True,
    )
    doc = {
        "schema": "theta-eval/1",
        **fields,
        "tau": tau_c,
        "z": list(z_c),
        "shift": shift_v,
        "value": value,
        "certificate": _cert_dict(cert),
    }
    _emit(doc, cfg, lambda: [
        f"value = {_fmt_complex(value)}",
        f"tail bound = {cert.bound:.3e} ({cert.terms} terms)",
    ])


@theta_group.command("components")
@_theta_common
@click.option("--tau")
@click.option("--z", "z_inline")
@_eps_option
@_format_options
def theta_components(gram, mode, e_rows, ep_rows, kernel, from_json, tau, z_inline, eps, fmt):
    """All components of the vector-valued series at (tau, z)."""
    cfg = _cfg(fmt, eps)
    request = _merge_request(
        from_json,
        gram=_parse_inline(gram, "gram") if gram else None,
        mode=mode,
        e=_parse_inline(e_rows, "e") if e_rows else None,
        eprime=_parse_inline(ep_rows, "eprime") if ep_rows else None,
        kernel=kernel,
        tau=tau,
        z=_parse_inline(z_inline, "z") if z_inline else None,
    )
    _lat, spec, fields = _build_theta_spec(request)
    tau_c, z_c = _parse_point(request)
    disc, values, certs = _wrap_value_error(
        theta_indef_components, spec, tau_c, z_c, cfg.precision(), with_certificates=True
    )
    doc = {
        "schema": "theta-components/1",
        **fields,
        "tau": tau_c,
        "z": list(z_c),
        "coset_reps": [list(elt.vec) for elt in disc.elements],
        "values": list(values),
        "tail_bounds": [c.bound for c in certs],
    }
    _emit(doc, cfg, lambda: [
        f"({', '.join(str(x) for x in elt.vec)}): {_fmt_complex(v)}"
        for elt, v in zip(disc.elements, values)
    ] + [f"components = {disc.order}"])


@theta_group.command("qexp")
@_theta_common
@click.option("--alpha", help="Torsion coefficient of tau, inline JSON list of rationals.")
@click.option("--beta", help="Torsion constant part, inline JSON list of rationals.")
@click.option("--order", help="Truncation order, a rational like '121/12'.")
@click.option("--shift", help="Component shift, inline JSON list of rationals.")
@click.option("--cache-dir", type=click.Path(), default=None)
@click.option("--no-cache", is_flag=True, default=False)
@_eps_option
@_format_options
def theta_qexp(gram, mode, e_rows, ep_rows, kernel, from_json, alpha, beta, order,
               shift, cache_dir, no_cache, eps, fmt):
    """Exact q-expansion of the specialization z = alpha tau + beta."""
    cfg = _cfg(fmt, eps, cache_dir, no_cache)
    request = _merge_request(
        from_json,
        gram=_parse_inline(gram, "gram") if gram else None,
        mode=mode,
        e=_parse_inline(e_rows, "e") if e_rows else None,
        eprime=_parse_inline(ep_rows, "eprime") if ep_rows else None,
        kernel=kernel,
        alpha=_parse_inline(alpha, "alpha") if alpha else None,
        beta=_parse_inline(beta, "beta") if beta else None,
        order=order,
        shift=_parse_inline(shift, "shift") if shift else None,
    )
    _lat, spec, fields = _build_theta_spec(request)
    alpha_v = _wrap_value_error(parse_vector, _need(request, "alpha"), "alpha")
    beta_v = _wrap_value_error(parse_vector, _need(request, "beta"), "beta")
    order_f = _wrap_value_error(parse_fraction, _need(request, "order"), "order")
    shift_v = None
    if request.get("shift") is not None:
        shift_v = _wrap_value_error(parse_vector, request["shift"], "shift")

    key_request = {
        "command": "theta-qexp",
        **fields,
        "alpha": alpha_v,
        "beta": beta_v,
        "order": order_f,
        "shift": shift_v,
    }
    cache = cfg.cache()
    prec = cfg.precision()
    series_doc = cache.lookup(key_request, eps=prec.eps) if cache else None
    cached = series_doc is not None
    if not cached:
        qs = _wrap_value_error(
            holomorphic_part_qexp, spec, alpha_v, beta_v, order_f, shift=shift_v
        )
        series_doc = to_jsonable(qs)
        if cache:
            cache.store(key_request, series_doc, eps=None if qs.exact else prec.eps)
    doc = {
        "schema": "theta-qexp/1",
        **fields,
        "alpha": alpha_v,
        "beta": beta_v,
        "order": order_f,
        "shift": shift_v,
        "cached": cached,
        "series": series_doc,
    }
    _emit(doc, cfg, lambda: [
        format_qseries(qseries_from_jsonable(series_doc), max_terms=16),
        f"cached = {cached}",
    ])


# -- mu ---------------------------------------------------------------------


@main.group("mu")
def mu_group():
    """Completed Appell-type kernels."""


@mu_group.command("eval")
@click.option("--m", type=int, default=None, help="Index of the component kernel.")
@click.option("--l", type=int, default=None, help="Residue mod 2m of the component kernel.")
@click.option("--tau")
@click.option("--z", "z_inline", help="Elliptic variable of the component kernel.")
@click.option("--u", help="First variable of the two-variable kernel.")
@click.option("--v", help="Second variable of the two-variable kernel.")
@click.option("--from-json", "from_json", type=click.Path())
@_eps_option
@_format_options
def mu_eval(m, l, tau, z_inline, u, v, from_json, eps, fmt):
    """Completed component kernel (--m/--l/--z) or two-variable kernel (--u/--v)."""
    cfg = _cfg(fmt, eps)
    request = _merge_request(from_json, m=m, l=l, tau=tau, z=z_inline, u=u, v=v)
    tau_c = _wrap_value_error(parse_complex, _need(request, "tau"), "tau")
    prec = cfg.precision()
    if request.get("m") is not None and request.get("u") is not None:
        raise InputError("m: give either the component index or u/v, not both")
    if request.get("m") is not None:
        m_i = int(request["m"])
        l_i = int(_need(request, "l"))
        z_c = _wrap_value_error(parse_complex, _need(request, "z"), "z")
        value, cert = _wrap_value_error(
            mu_hat_ml, m_i, l_i, tau_c, z_c, prec, with_certificate=True
        )
        doc = {
            "schema": "mu-eval/1",
            "kind": "component",
            "m": m_i,
            "l": l_i,
            "tau": tau_c,
            "z": z_c,
            "value": value,
            "certificate": _cert_dict(cert),
        }
    else:
        u_c = _wrap_value_error(parse_complex, _need(request, "u"), "u")
        v_c = _wrap_value_error(parse_complex, _need(request, "v"), "v")
        value, cert = _wrap_value_error(
            mu_two_var, tau_c, u_c, v_c, prec, with_certificate=True
        )
        doc = {
            "schema": "mu-eval/1",
            "kind": "two-variable",
            "tau": tau_c,
            "u": u_c,
            "v": v_c,
            "value": value,
            "certificate": _cert_dict(cert),
        }
    _emit(doc, cfg, lambda: [
        f"value = {_fmt_complex(value)}",
        f"tail bound = {cert.bound:.3e}",
    ])


@mu_group.command("residual")
@click.option("--tau")
@click.option("--u")
@click.option("--v")
@click.option("--from-json", "from_json", type=click.Path())
@_eps_option
@_format_options
def mu_residual(tau, u, v, from_json, eps, fmt):
    """Completed kernel minus its meromorphic part (a function of u - v)."""
    cfg = _cfg(fmt, eps)
    request = _merge_request(from_json, tau=tau, u=u, v=v)
    tau_c = _wrap_value_error(parse_complex, _need(request, "tau"), "tau")
    u_c = _wrap_value_error(parse_complex, _need(request, "u"), "u")
    v_c = _wrap_value_error(parse_complex, _need(request, "v"), "v")
    value, cert = _wrap_value_error(
        splitting_residual, tau_c, u_c, v_c, cfg.precision(), with_certificate=True
    )
    doc = {
        "schema": "mu-residual/1",
        "tau": tau_c,
        "u": u_c,
        "v": v_c,
        "value": value,
        "certificate": _cert_dict(cert),
    }
    _emit(doc, cfg, lambda: [f"value = {_fmt_complex(value)}"])


# -- op ---------------------------------------------------------------------

_TARGETS = ("theta", "theta-definite", "mu-component", "mu-two-var")


def _build_target(request: dict, prec: Precision):
    """``(phi, op_lattice, fields)`` for the selected built-in family."""
    target = request.get("target")
    if target not in _TARGETS:
        raise InputError(f"target: expected one of {', '.join(_TARGETS)}, got {target!r}")
    if target == "theta":
        lat, spec, fields = _build_theta_spec(request)
        phi = lambda tau, z: theta_indef_eval(spec, tau, tuple(z), prec)
        return phi, lat, {"target": target, **fields}
    if target == "theta-definite":
        lat, gram, mode = _build_lattice(request)
        shift = request.get("shift")
        shift_v = (Fraction(0),) * lat.rank
        if shift is not None:
            shift_v = _wrap_value_error(parse_vector, shift, "shift")
        phi = lambda tau, z: theta_definite(lat, shift_v, tau, tuple(z), prec)
        return phi, lat, {"target": target, "gram": gram, "mode": mode, "shift": shift_v}
    if target == "mu-component":
        m_i = int(_need(request, "m"))
        l_i = int(_need(request, "l"))
        if m_i <= 0:
            raise InputError("m: component index must be positive")
        lat = lattice([[-m_i]], "paper-L")
        phi = lambda tau, z: mu_hat_ml(m_i, l_i, tau, z[0], prec)
        return phi, lat, {"target": target, "m": m_i, "l": l_i}
    lat = lattice([[-1, 1], [1, -1]], "gram")
    phi = lambda tau, z: mu_two_var(tau, z[0], z[1], prec)
    return phi, lat, {"target": target}


def _build_operator(request: dict, op_lattice) -> OperatorSpec:
    op_id = _need(request, "op")
    weight = request.get("weight")
    if weight is not None:
        try:
            weight = parse_fraction(weight, "weight")
        except ValueError:
            try:
                weight = float(weight)
            except (TypeError, ValueError) as exc:
                raise InputError(f"weight: not a number: {weight!r}") from exc
    frame_rows = request.get("frame")
    frame_v = ()
    if frame_rows is not None:
        frame_v = _wrap_value_error(parse_matrix, frame_rows, "frame")
    return _wrap_value_error(
        OperatorSpec, op_id, weight=weight, lattice=op_lattice, frame=frame_v
    )


def _stencil(request: dict) -> StencilConfig:
    kwargs = {}
    if request.get("stencil_order") is not None:
        kwargs["order"] = int(request["stencil_order"])
    if request.get("h_tau") is not None:
        kwargs["h_tau"] = float(request["h_tau"])
    if request.get("h_z") is not None:
        kwargs["h_z"] = float(request["h_z"])
    return _wrap_value_error(StencilConfig, **kwargs)


def _op_common(fn):
    for opt in (
        click.option("--op", help="Operator identifier, e.g. 'Casimir' or 'XiHE'."),
        click.option("--target", type=click.Choice(_TARGETS), default=None,
                     help="Built-in function family the operator acts on."),
        click.option("--weight", help="Weight, rational like '1/2' (for weighted operators)."),
        click.option("--frame", help="Distinguished vector rows, inline JSON."),
        click.option("--gram", help="Index matrix as inline JSON (theta targets)."),
        click.option("--mode", type=click.Choice(["gram", "paper-L"]), default=None),
        click.option("--e", "e_rows", help="First frame rows (theta target)."),
        click.option("--eprime", "ep_rows", help="Second frame rows (theta target)."),
        click.option("--kernel", type=click.Choice(["default", "sgn"]), default=None),
        click.option("--shift", help="Component shift (theta-definite target)."),
        click.option("--m", type=int, default=None, help="Index (mu-component target)."),
        click.option("--l", type=int, default=None, help="Residue (mu-component target)."),
        click.option("--stencil-order", type=int, default=None),
        click.option("--h-tau", type=float, default=None),
        click.option("--h-z", type=float, default=None),
        click.option("--from-json", "from_json", type=click.Path()),
    ):
        fn = opt(fn)
    return fn


def _op_request(from_json, **flags) -> dict:
    parsed = {}
    for key in ("gram", "e", "eprime", "frame", "shift"):
        if flags.get(key) is not None:
            flags[key] = _parse_inline(flags[key], key)
    for key, value in flags.items():
        parsed[key] = value
    return _merge_request(from_json, **parsed)


@main.group("op")
def op_group():
    """Covariant differential operators (finite-difference evaluation)."""


@op_group.command("apply")
@_op_common
@click.option("--tau")
@click.option("--z", "z_inline", help="Elliptic variable(s), inline JSON list.")
@_eps_option
@_format_options
def op_apply(op, target, weight, frame, gram, mode, e_rows, ep_rows, kernel, shift,
             m, l, stencil_order, h_tau, h_z, from_json, tau, z_inline, eps, fmt):
    """Apply an operator to a built-in function at one point."""
    cfg = _cfg(fmt, eps)
    request = _op_request(
        from_json, op=op, target=target, weight=weight, frame=frame, gram=gram,
        mode=mode, e=e_rows, eprime=ep_rows, kernel=kernel, shift=shift, m=m, l=l,
        stencil_order=stencil_order, h_tau=h_tau, h_z=h_z,
        tau=tau, z=_parse_inline(z_inline, "z") if z_inline else None,
    )
    phi, op_lat, fields = _build_target(request, cfg.precision())
    spec = _build_operator(request, op_lat)
    stencil = _stencil(request)
    tau_c, z_c = _parse_point(request)
    value = _wrap_value_error(apply_operator, spec, phi, (tau_c, z_c), stencil)
    doc = {
        "schema": "op-apply/1",
        "op": spec.id,
        "weight": request.get("weight"),
        "frame": list(spec.frame) if spec.frame else None,
        **fields,
        "stencil_order": stencil.order,
        "tau": tau_c,
        "z": list(z_c),
        "value": value,
    }
    _emit(doc, cfg, lambda: [f"{spec.id} -> {_fmt_complex(value)}"])


@op_group.command("check")
@_op_common
@click.option("--points", help="JSON list of {\"tau\": ..., \"z\": [...]} objects.")
@_eps_option
@_format_options
@click.pass_context
def op_check(ctx, op, target, weight, frame, gram, mode, e_rows, ep_rows, kernel, shift,
             m, l, stencil_order, h_tau, h_z, from_json, points, eps, fmt):
    """Test annihilation at sample points; exits 1 when it fails."""
    cfg = _cfg(fmt, eps)
    request = _op_request(
        from_json, op=op, target=target, weight=weight, frame=frame, gram=gram,
        mode=mode, e=e_rows, eprime=ep_rows, kernel=kernel, shift=shift, m=m, l=l,
        stencil_order=stencil_order, h_tau=h_tau, h_z=h_z,
        points=_parse_inline(points, "points") if points else None,
    )
    phi, op_lat, fields = _build_target(request, cfg.precision())
    spec = _build_operator(request, op_lat)
    stencil = _stencil(request)
    raw_points = _need(request, "points")
    if not isinstance(raw_points, list) or not raw_points:
        raise InputError("points: expected a nonempty JSON list")
    pts = []
    for i, p in enumerate(raw_points):
        if not isinstance(p, dict):
            raise InputError(f"points[{i}]: expected an object with 'tau' and 'z'")
        pts.append(_parse_point(p))
    report = _wrap_value_error(check_annihilation, spec, phi, pts, stencil)
    doc = {
        "schema": "op-check/1",
        "op": spec.id,
        "weight": request.get("weight"),
        "frame": list(spec.frame) if spec.frame else None,
        **fields,
        "points": [{"tau": t, "z": list(z)} for t, z in pts],
        "report": report,
    }
    _emit(doc, cfg, lambda: [
        f"{'PASS' if report['pass'] else 'FAIL'} {spec.id} on {len(pts)} points"
    ])
    if not report["pass"]:
        ctx.exit(1)


# -- verify -----------------------------------------------------------------


@main.command("verify")
@click.argument("suite")
@click.option("--copies", type=int, default=None, help="Tensor copies (gz_product).")
@click.option("--order", type=int, default=None, help="Expansion order (q-series suites).")
@click.option("--points", type=int, default=None, help="Grid size (efunction).")
@click.option("--tol", type=float, default=None, help="Override the suite tolerance.")
@click.option("--json", "as_json", is_flag=True, default=False, help="Force JSON output.")
@_eps_option
@_format_options
@click.pass_context
def verify_cmd(ctx, suite, copies, order, points, tol, as_json, eps, fmt):
    """Run one verification suite or 'all'; exits 0/1 with the result.

    SUITE is an identity id, 'modularity', or 'all'.
    """
    cfg = _cfg("json" if as_json else (fmt or "json"), eps)
    params = {k: v for k, v in (("copies", copies), ("order", order), ("points", points))
              if v is not None}
    prec = cfg.precision()
    if suite == "all":
        if params or tol is not None:
            raise InputError("suite: per-suite parameters apply to a single suite, not 'all'")
        reports = run_all(prec)
    else:
        reports = [_wrap_value_error(run_suite, suite, params or None, tol, prec)]
    doc = generate_report(reports)
    if cfg.fmt == "json":
        click.echo(dumps(doc), nl=False)
    else:
        click.echo(render_text(doc), nl=False)
    ctx.exit(exit_code(doc))


# -- cache ------------------------------------------------------------------


@main.group("cache")
def cache_group():
    """Coefficient cache maintenance."""


@cache_group.command("stats")
@click.option("--cache-dir", type=click.Path(), default=None)
@_format_options
def cache_stats(cache_dir, fmt):
    """Entry count, total size, and location."""
    cfg = _cfg(fmt, cache_dir=cache_dir)
    stats = CoefficientCache(cfg.cache_dir).stats()
    doc = {"schema": "cache-stats/1", **stats}
    _emit(doc, cfg, lambda: [f"{k} = {v}" for k, v in stats.items()])


@cache_group.command("clear")
@click.option("--cache-dir", type=click.Path(), default=None)
@_format_options
def cache_clear(cache_dir, fmt):
    """Remove every cache entry."""
    cfg = _cfg(fmt, cache_dir=cache_dir)
    removed = CoefficientCache(cfg.cache_dir).clear()
    doc = {"schema": "cache-clear/1", "removed": removed,
           "directory": str(cfg.cache_dir)}
    _emit(doc, cfg, lambda: [f"removed = {removed}"])


if __name__ == "__main__":
    main()

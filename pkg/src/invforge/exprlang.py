"""Small expression language over jet coordinates.

Users submit candidate invariants and equation residuals as text, e.g.
``"(1 - R(1)) * S(1) + R(2)"`` or ``"u_x1x2 ^ 2 + S(2)"``.  Precedence,
lowest to highest: ``+ -``; ``* /``; unary ``-``; ``^`` (right
associative); calls; atoms.

Jet symbols: ``x1..xN`` (plus ``x0``/``t`` when the binding has a time
coordinate), ``u1..um`` (``u`` means ``u1``), derivatives by suffix:
``u_x1``, ``u2_x1x3``, ``u_t``, ``u_tt``, ``u_x1t``.  Builtins: ``S(k)``,
``R(k)``, ``Sjk(j,k)`` with optional field selectors after ``;``,
``tr``/``det`` over the tensor names ``ddu1..ddum``, ``theta``, ``w``,
``contract(du1, du2)``, and ``exp``, ``log``, ``conj``.
"""

from __future__ import annotations

from dataclasses import dataclass

from .dual import dexp, dlog
from .invcat import (
    JetSpace,
    ScalarJetFunction,
    _S,
    _Sjk,
    _dep_coords,
    _power,
    _tensor_cached,
    covariant_tensor,
    determinant,
)
from .jetspace import (
    COMPLEX,
    REAL,
    FieldKind,
    Metric,
    base_coord,
    d1_coord,
    d2_coord,
    euclidean,
    field_coord,
)


@dataclass(frozen=True)
class SourceSpan:
    start: int
    end: int


class ParseError(ValueError):
    def __init__(self, message, span: SourceSpan):
        super().__init__(f"{message} (at {span.start}..{span.end})")
        self.message = message
        self.span = span


class BindError(ValueError):
    pass


# AST ------------------------------------------------------------------------


@dataclass(frozen=True)
class Num:
    value: float
    span: SourceSpan = None


@dataclass(frozen=True)
class Sym:
    name: str
    span: SourceSpan = None


@dataclass(frozen=True)
class Neg:
    arg: object
    span: SourceSpan = None


@dataclass(frozen=True)
class Bin:
    op: str
    left: object
    right: object
    span: SourceSpan = None


@dataclass(frozen=True)
class Call:
    name: str
    args: tuple
    fields: tuple = ()
    span: SourceSpan = None


def _strip_spans(node):
    if isinstance(node, Num):
        return Num(node.value)
    if isinstance(node, Sym):
        return Sym(node.name)
    if isinstance(node, Neg):
        return Neg(_strip_spans(node.arg))
    if isinstance(node, Bin):
        return Bin(node.op, _strip_spans(node.left), _strip_spans(node.right))
    if isinstance(node, Call):
        return Call(node.name, tuple(_strip_spans(a) for a in node.args),
                    tuple(_strip_spans(a) for a in node.fields))
    raise TypeError(node)


def same_ast(a, b) -> bool:
    return _strip_spans(a) == _strip_spans(b)


# tokenizer -------------------------------------------------------------------

_OPS = set("+-*/^(),;")


def _tokenize(text: str):
    tokens = []
    i = 0
    n = len(text)
    while i < n:
        ch = text[i]
        if ch.isspace():
            i += 1
            continue
        if ch in _OPS:
            tokens.append((ch, SourceSpan(i, i + 1)))
            i += 1
            continue
        if ch.isdigit() or (ch == "." and i + 1 < n and text[i + 1].isdigit()):
            j = i
            seen_dot = False
            while j < n and (text[j].isdigit() or (text[j] == "." and not seen_dot)):
                if text[j] == ".":
                    seen_dot = True
                j += 1
            if j < n and text[j] in "eE":
                k = j + 1
                if k < n and text[k] in "+-":
                    k += 1
                if k < n and text[k].isdigit():
                    j = k
                    while j < n and text[j].isdigit():
                        j += 1
            tokens.append((("num", text[i:j]), SourceSpan(i, j)))
            i = j
            continue
        if ch.isalpha() or ch == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            tokens.append((("ident", text[i:j]), SourceSpan(i, j)))
            i = j
            continue
        raise ParseError(f"unexpected character {ch!r}", SourceSpan(i, i + 1))
    tokens.append(("end", SourceSpan(n, n)))
    return tokens


class _Parser:
    def __init__(self, text):
        self.text = text
        self.tokens = _tokenize(text)
        self.pos = 0

    def peek(self):
        return self.tokens[self.pos]

    def advance(self):
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect(self, symbol):
        tok, span = self.peek()
        if tok != symbol:
            raise ParseError(f"expected {symbol!r}", span)
        return self.advance()

    def parse(self):
        node = self.expr()
        tok, span = self.peek()
        if tok != "end":
            raise ParseError("trailing input", span)
        return node

    def expr(self):
        node = self.term()
        while True:
            tok, span = self.peek()
            if tok in ("+", "-"):
                self.advance()
                rhs = self.term()
                node = Bin(tok, node, rhs, span)
            else:
                return node

    def term(self):
        node = self.unary()
        while True:
            tok, span = self.peek()
            if tok in ("*", "/"):
                self.advance()
                rhs = self.unary()
                node = Bin(tok, node, rhs, span)
            else:
                return node

    def unary(self):
        tok, span = self.peek()
        if tok == "-":
            self.advance()
            return Neg(self.unary(), span)
        return self.power()

    def power(self):
        node = self.atom()
        tok, span = self.peek()
        if tok == "^":
            self.advance()
            # right associative; exponent may carry its own unary minus
            rhs = self.unary()
            node = Bin("^", node, rhs, span)
        return node

    def atom(self):
        tok, span = self.advance()
        if tok == "(":
            node = self.expr()
            self.expect(")")
            return node
        if isinstance(tok, tuple) and tok[0] == "num":
            return Num(float(tok[1]), span)
        if isinstance(tok, tuple) and tok[0] == "ident":
            name = tok[1]
            nxt, _ = self.peek()
            if nxt == "(":
                self.advance()
                args = []
                fields = []
                bucket = args
                if self.peek()[0] != ")":
                    bucket.append(self.expr())
                    while True:
                        t2, s2 = self.peek()
                        if t2 == ",":
                            self.advance()
                            bucket.append(self.expr())
                        elif t2 == ";":
                            if bucket is fields:
                                raise ParseError("only one ';' allowed", s2)
                            bucket = fields
                            self.advance()
                            bucket.append(self.expr())
                        else:
                            break
                self.expect(")")
                return Call(name, tuple(args), tuple(fields), span)
            return Sym(name, span)
        raise ParseError("expected an expression", span)


def parse(text: str):
    """Parse to an AST; raises ParseError with a source span."""
    return _Parser(text).parse()


def to_text(node) -> str:
    """Print an AST back to parseable text (round-trips to an equal AST)."""
    def prec(nd):
        if isinstance(nd, Bin):
            return {"+": 1, "-": 1, "*": 2, "/": 2, "^": 4}[nd.op]
        if isinstance(nd, Neg):
            return 3
        return 9

    def wrap(nd, parent_prec, right_side=False):
        s = to_text(nd)
        p = prec(nd)
        if p < parent_prec or (p == parent_prec and right_side
                               and not isinstance(nd, Neg)):
            return f"({s})"
        return s

    if isinstance(node, Num):
        return f"{node.value:g}"
    if isinstance(node, Sym):
        return node.name
    if isinstance(node, Neg):
        return "-" + wrap(node.arg, 3)
    if isinstance(node, Bin):
        if node.op == "^":
            return wrap(node.left, 5) + " ^ " + wrap(node.right, 4)
        p = prec(node)
        return (wrap(node.left, p) + f" {node.op} "
                + wrap(node.right, p + 1))
    if isinstance(node, Call):
        inner = ", ".join(to_text(a) for a in node.args)
        if node.fields:
            inner += "; " + ", ".join(to_text(a) for a in node.fields)
        return f"{node.name}({inner})"
    raise TypeError(node)


# binding ---------------------------------------------------------------------


_TENSOR_NAMES = ("theta", "w")


def _int_arg(node, what):
    if isinstance(node, Num) and float(node.value).is_integer():
        return int(node.value)
    if isinstance(node, Neg) and isinstance(node.arg, Num) \
            and float(node.arg.value).is_integer():
        return -int(node.arg.value)
    raise BindError(f"{what} must be an integer literal")


def _conjugate_ast(node, field_kind, n_fields):
    """Push conj through the tree: real atoms unchanged, field slots swap
    to their conjugate partners (valid only for complex bindings)."""
    if isinstance(node, Num):
        return node
    if isinstance(node, Neg):
        return Neg(_conjugate_ast(node.arg, field_kind, n_fields))
    if isinstance(node, Bin):
        return Bin(node.op,
                   _conjugate_ast(node.left, field_kind, n_fields),
                   _conjugate_ast(node.right, field_kind, n_fields))
    if isinstance(node, Sym):
        name = node.name
        if name.startswith("u") or name.startswith("du") \
                or name.startswith("ddu"):
            return Sym(_swap_field_name(name, field_kind, n_fields),
                       node.span)
        return node
    if isinstance(node, Call):
        if node.name == "conj":
            return node.args[0]
        args = tuple(_conjugate_ast(a, field_kind, n_fields)
                     for a in node.args)
        fields = tuple(
            Num(field_kind.conjugate_index(_int_arg(f, "field index"),
                                           n_fields))
            for f in node.fields)
        return Call(node.name, args, fields, node.span)
    raise TypeError(node)


def _swap_field_name(name, field_kind, n_fields):
    for prefix in ("ddu", "du", "u"):
        if name.startswith(prefix):
            rest = name[len(prefix):]
            digits = ""
            while rest and rest[0].isdigit():
                digits += rest[0]
                rest = rest[1:]
            r = int(digits) if digits else 1
            r2 = field_kind.conjugate_index(r, n_fields)
            return f"{prefix}{r2}{rest}"
    return name


def bind(expr, n_base: int, n_fields: int = 1, metric: Metric = None,
         field_kind: FieldKind = REAL, time_mode: bool = False,
         lam: float = 1.0, mu: float = 1.0) -> ScalarJetFunction:
    """Resolve symbols against an (N, m, metric) space and return a
    differentiable evaluator.

    ``time_mode`` names base coordinate 0 ``t`` (Galilean setups);
    a Minkowski metric names the coordinates ``x0..x{N-1}``.
    """
    if isinstance(expr, str):
        expr = parse(expr)
    metric = metric or euclidean(n_base)
    if metric.dim != n_base:
        raise BindError("metric dimension must match the base dimension")
    signs = metric.signs
    idx = tuple(range(n_base))
    label = to_text(expr)
    deps = set()

    def resolve_base(token, span):
        if token == "t":
            if not time_mode:
                raise BindError("'t' is only valid in a time binding")
            return 0
        if token.startswith("x") and token[1:].isdigit():
            k = int(token[1:])
            if time_mode or metric.kind == "minkowski":
                if not 0 <= k < n_base:
                    raise BindError(f"index out of range: {token}")
                return k
            if not 1 <= k <= n_base:
                raise BindError(f"index out of range: {token}")
            return k - 1
        raise BindError(f"unknown coordinate {token!r}")

    def resolve_field(fname):
        r = 1 if fname == "" else int(fname)
        if not 1 <= r <= n_fields:
            raise BindError(f"field index out of range: u{fname}")
        return r

    def compile_node(node):
        if isinstance(node, Num):
            c = node.value
            return lambda view: c
        if isinstance(node, Neg):
            inner = compile_node(node.arg)
            return lambda view: -inner(view)
        if isinstance(node, Bin):
            lf = compile_node(node.left)
            rf = compile_node(node.right)
            op = node.op
            if op == "+":
                return lambda view: lf(view) + rf(view)
            if op == "-":
                return lambda view: lf(view) - rf(view)
            if op == "*":
                return lambda view: lf(view) * rf(view)
            if op == "/":
                return lambda view: lf(view) / rf(view)
            return _compile_pow(lf, rf, node)
        if isinstance(node, Sym):
            return compile_sym(node)
        if isinstance(node, Call):
            return compile_call(node)
        raise TypeError(node)

    def _compile_pow(lf, rf, node):
        if isinstance(node.right, Num) \
                and float(node.right.value).is_integer():
            e = int(node.right.value)
            return lambda view: _power(lf(view), e)

        def powfn(view):
            from .dual import EvaluationError, value_of
            base = lf(view)
            expo = rf(view)
            eval_ = value_of(expo)
            if not isinstance(eval_, complex) and float(eval_).is_integer():
                return _power(base, int(eval_))
            bval = value_of(base)
            if not isinstance(bval, complex) and bval <= 0:
                raise EvaluationError(
                    "fractional power needs a positive base")
            return dexp(expo * dlog(base))

        return powfn

    def compile_sym(node):
        name = node.name
        if name == "t" or (name.startswith("x") and name[1:].isdigit()):
            i = resolve_base(name, node.span)
            deps.add(base_coord(i))
            return lambda view, i=i: view.x(i)
        if name.startswith("u"):
            body = name[1:]
            if "_" in body:
                fpart, suffix = body.split("_", 1)
            else:
                fpart, suffix = body, ""
            if fpart and not fpart.isdigit():
                raise BindError(f"unknown symbol {name!r}")
            r = resolve_field(fpart)
            if not suffix:
                deps.add(field_coord(r))
                return lambda view, r=r: view.u(r)
            parts = _split_suffix(suffix)
            if len(parts) == 1:
                i = resolve_base(parts[0], node.span)
                deps.add(d1_coord(r, i))
                return lambda view, r=r, i=i: view.du(r, i)
            if len(parts) == 2:
                i = resolve_base(parts[0], node.span)
                j = resolve_base(parts[1], node.span)
                deps.add(d2_coord(r, i, j))
                return lambda view, r=r, i=i, j=j: view.ddu(r, i, j)
            raise BindError(f"derivative order above two: {name!r}")
        raise BindError(f"unknown symbol {node.name!r}")

    def _split_suffix(suffix):
        parts = []
        i = 0
        while i < len(suffix):
            if suffix[i] == "t":
                parts.append("t")
                i += 1
            elif suffix[i] == "x":
                j = i + 1
                while j < len(suffix) and suffix[j].isdigit():
                    j += 1
                if j == i + 1:
                    raise BindError(f"bad derivative suffix {suffix!r}")
                parts.append(suffix[i:j])
                i = j
            else:
                raise BindError(f"bad derivative suffix {suffix!r}")
        return parts

    def _field_args(node, count_max):
        rs = [_int_arg(f, "field index") for f in node.fields]
        if len(rs) > count_max:
            raise BindError(f"{node.name} takes at most {count_max} field "
                            "indices")
        for r in rs:
            resolve_field(str(r))
        return rs

    def _tensor_arg(node):
        if len(node.args) != 1 or not isinstance(node.args[0], Sym):
            raise BindError(f"{node.name} expects a tensor name")
        tname = node.args[0].name
        if tname.startswith("ddu"):
            r = resolve_field(tname[3:] if tname[3:] else "")
            for c in _dep_coords(n_base, n_fields, ("d2",), rs=(r,)):
                deps.add(c)
            return ("hess", r)
        if tname in _TENSOR_NAMES:
            spatial = metric.kind == "euclidean" and time_mode
            if spatial:
                raise BindError(f"{tname} is not available in time bindings")
            builder = covariant_tensor(
                "theta" if (tname == "theta" and metric.kind == "euclidean")
                else "w" if (tname == "w" and metric.kind == "euclidean")
                else "theta_minkowski" if tname == "theta"
                else "w_minkowski",
                n_base if metric.kind == "euclidean" else n_base - 1,
                lam=lam, mu=mu)
            for c in builder.deps:
                deps.add(c)
            return ("tensor", tname, builder.builder)
        raise BindError(f"unknown tensor {tname!r}")

    def compile_call(node):
        name = node.name
        if name in ("exp", "log"):
            if len(node.args) != 1 or node.fields:
                raise BindError(f"{name} takes one argument")
            inner = compile_node(node.args[0])
            fun = dexp if name == "exp" else dlog
            return lambda view: fun(inner(view))
        if name == "conj":
            if len(node.args) != 1 or node.fields:
                raise BindError("conj takes one argument")
            if field_kind is not COMPLEX:
                raise BindError("conj requires a complex field binding")
            return compile_node(
                _conjugate_ast(node.args[0], field_kind, n_fields))
        if name == "S":
            if len(node.args) != 1:
                raise BindError("S takes one argument S(k) or S(k; r)")
            k = _int_arg(node.args[0], "k")
            rs = _field_args(node, 1)
            r = rs[0] if rs else 1
            if not 1 <= k <= n_base + 1:
                raise BindError(f"S order {k} out of range")
            for c in _dep_coords(n_base, n_fields, ("d2",), rs=(r,)):
                deps.add(c)
            return lambda view: _S(view, r, idx, signs, k)
        if name == "R":
            if len(node.args) != 1:
                raise BindError("R takes one argument R(k) or R(k; r, s)")
            k = _int_arg(node.args[0], "k")
            rs = _field_args(node, 2)
            rv = rs[0] if rs else 1
            rm = rs[1] if len(rs) > 1 else 1
            if not 1 <= k <= n_base + 1:
                raise BindError(f"R order {k} out of range")
            for c in _dep_coords(n_base, n_fields, ("d1",), rs=(rv,)):
                deps.add(c)
            for c in _dep_coords(n_base, n_fields, ("d2",), rs=(rm,)):
                deps.add(c)
            return lambda view: _R_expr(view, rv, rm, k)
        if name == "Sjk":
            if len(node.args) != 2:
                raise BindError("Sjk takes two arguments Sjk(j, k)")
            j = _int_arg(node.args[0], "j")
            k = _int_arg(node.args[1], "k")
            rs = _field_args(node, 2)
            r1 = rs[0] if rs else 1
            r2 = rs[1] if len(rs) > 1 else (2 if n_fields > 1 else 1)
            if not 0 <= j <= k:
                raise BindError("need 0 <= j <= k")
            for c in _dep_coords(n_base, n_fields, ("d2",), rs=(r1, r2)):
                deps.add(c)
            return lambda view: _Sjk(view, r1, r2, idx, signs, j, k)
        if name in ("tr", "det"):
            spec = _tensor_arg(node)
            if spec[0] == "hess":
                r = spec[1]
                if name == "tr":
                    return lambda view: _S(view, r, idx, signs, 1)
                return lambda view: determinant(
                    [[view.ddu(r, i, j) for j in idx] for i in idx])
            _, tname, builder = spec
            if name == "tr":
                def trfn(view):
                    t = _tensor_cached(view, ("expr", tname), builder)
                    acc = 0.0
                    for i in range(len(t)):
                        acc = acc + signs[i] * t[i][i]
                    return acc
                return trfn
            return lambda view: determinant(
                _tensor_cached(view, ("expr", tname), builder))
        if name == "contract":
            if len(node.args) != 2:
                raise BindError("contract takes two vector names")
            vecs = []
            for arg in node.args:
                if not (isinstance(arg, Sym) and arg.name.startswith("du")):
                    raise BindError("contract expects gradient names like du1")
                r = resolve_field(arg.name[2:] if arg.name[2:] else "")
                for c in _dep_coords(n_base, n_fields, ("d1",), rs=(r,)):
                    deps.add(c)
                vecs.append(r)
            r1, r2 = vecs
            def cfn(view):
                acc = 0.0
                for i in idx:
                    acc = acc + signs[i] * view.du(r1, i) * view.du(r2, i)
                return acc
            return cfn
        raise BindError(f"unknown function {node.name!r}")

    def _R_expr(view, rv, rm, k):
        from .invcat import power_form
        vec = [view.du(rv, i) for i in idx]
        mat = [[view.ddu(rm, i, j) for j in idx] for i in idx]
        return power_form(vec, mat, metric, k)

    fn = compile_node(expr)
    space = JetSpace(n_base, n_fields, field_kind, metric,
                     positive_fields=False)
    dep_order = [c for c in space.coords() if c in deps]
    return ScalarJetFunction(label, fn, tuple(dep_order), space)


def bind_scalar_function(text: str):
    """Compile an expression in the single variable ``u`` to a callable
    usable as an algebra coefficient function (dual-capable)."""
    ast_root = parse(text)

    def compile_node(node):
        if isinstance(node, Num):
            c = node.value
            return lambda u: c
        if isinstance(node, Neg):
            inner = compile_node(node.arg)
            return lambda u: -inner(u)
        if isinstance(node, Sym):
            if node.name != "u":
                raise BindError(
                    f"coefficient functions may only use 'u', got "
                    f"{node.name!r}")
            return lambda u: u
        if isinstance(node, Call):
            if node.name not in ("exp", "log") or len(node.args) != 1 \
                    or node.fields:
                raise BindError(
                    "coefficient functions support exp/log calls only")
            inner = compile_node(node.args[0])
            fun = dexp if node.name == "exp" else dlog
            return lambda u: fun(inner(u))
        if isinstance(node, Bin):
            lf = compile_node(node.left)
            rf = compile_node(node.right)
            op = node.op
            if op == "+":
                return lambda u: lf(u) + rf(u)
            if op == "-":
                return lambda u: lf(u) - rf(u)
            if op == "*":
                return lambda u: lf(u) * rf(u)
            if op == "/":
                return lambda u: lf(u) / rf(u)
            if isinstance(node.right, Num) \
                    and float(node.right.value).is_integer():
                e = int(node.right.value)
                return lambda u: _power(lf(u), e)
            return lambda u: dexp(rf(u) * dlog(lf(u)))
        raise TypeError(node)

    fn = compile_node(ast_root)
    fn.source = text
    return fn

"""Embedded interpreter for induced programs.

Induced code runs in a restricted program form, not in the host interpreter:
arithmetic, collections, conditionals, loops, comprehensions, lambdas,
whitelisted methods on builtin types, declared helper functions and the
call_LLM primitive.  No imports, no attribute access outside the method
whitelist, no dunder names, and a step budget against runaway loops.
"""

from __future__ import annotations

import ast
from dataclasses import dataclass, field


class ProgramError(RuntimeError):
    """Runtime or validation failure inside an induced program."""

    def __init__(self, message: str, function: str = "?", lineno: int | None = None):
        self.function = function
        self.lineno = lineno
        where = f" in {function}" + (f" at line {lineno}" if lineno else "")
        super().__init__(message + where)


_ALLOWED_STATEMENTS = (
    ast.FunctionDef,
    ast.Return,
    ast.Assign,
    ast.AugAssign,
    ast.AnnAssign,
    ast.Expr,
    ast.If,
    ast.For,
    ast.While,
    ast.Break,
    ast.Continue,
    ast.Pass,
)

_ALLOWED_EXPRESSIONS = (
    ast.BoolOp,
    ast.BinOp,
    ast.UnaryOp,
    ast.Lambda,
    ast.IfExp,
    ast.Dict,
    ast.Set,
    ast.ListComp,
    ast.SetComp,
    ast.DictComp,
    ast.GeneratorExp,
    ast.Compare,
    ast.Call,
    ast.Constant,
    ast.JoinedStr,
    ast.FormattedValue,
    ast.Attribute,
    ast.Subscript,
    ast.Name,
    ast.List,
    ast.Tuple,
    ast.Slice,
    ast.Starred,
    ast.keyword,
    ast.comprehension,
    ast.arguments,
    ast.arg,
)

_METHODS = {
    str: {
        "lower", "upper", "strip", "lstrip", "rstrip", "split", "join", "replace",
        "startswith", "endswith", "find", "count", "isdigit", "title", "capitalize",
    },
    list: {
        "append", "extend", "insert", "remove", "pop", "index", "count", "sort",
        "reverse", "copy",
    },
    dict: {"get", "keys", "values", "items", "update", "pop", "setdefault", "copy"},
    set: {"add", "discard", "remove", "union", "intersection", "difference", "copy"},
    tuple: {"index", "count"},
}

SAFE_BUILTINS = {
    "len": len,
    "range": range,
    "enumerate": enumerate,
    "sorted": sorted,
    "reversed": reversed,
    "min": min,
    "max": max,
    "sum": sum,
    "abs": abs,
    "round": round,
    "str": str,
    "int": int,
    "float": float,
    "bool": bool,
    "list": list,
    "dict": dict,
    "tuple": tuple,
    "set": set,
    "zip": zip,
    "any": any,
    "all": all,
    "isinstance": isinstance,
}


@dataclass(frozen=True)
class RestrictedFunction:
    name: str
    params: tuple[str, ...]
    defaults: tuple = ()
    doc: str = ""
    source: str = ""
    tree: ast.FunctionDef = None

    def signature(self) -> str:
        return f"{self.name}({', '.join(self.params)})"


@dataclass
class Program:
    """A bundle of restricted functions plus the designated main entry point."""

    functions: dict[str, RestrictedFunction]
    main: str
    family: str = ""

    def to_json(self) -> dict:
        return {
            "family": self.family,
            "main": self.main,
            "functions": {name: fn.source for name, fn in self.functions.items()},
        }

    @staticmethod
    def from_json(doc: dict) -> "Program":
        functions = {name: parse_function(src) for name, src in doc["functions"].items()}
        return Program(functions=functions, main=doc["main"], family=doc.get("family", ""))


def _validate_tree(tree: ast.AST, fn_name: str) -> None:
    for node in ast.walk(tree):
        if isinstance(node, ast.expr) and not isinstance(node, _ALLOWED_EXPRESSIONS):
            raise ProgramError(f"disallowed expression {type(node).__name__}", fn_name, getattr(node, "lineno", None))
        if isinstance(node, ast.stmt) and not isinstance(node, _ALLOWED_STATEMENTS):
            raise ProgramError(f"disallowed statement {type(node).__name__}", fn_name, getattr(node, "lineno", None))
        if isinstance(node, ast.Name) and node.id.startswith("__"):
            raise ProgramError(f"dunder name {node.id!r} not allowed", fn_name, node.lineno)
        if isinstance(node, ast.Attribute):
            if node.attr.startswith("_"):
                raise ProgramError(f"private attribute {node.attr!r} not allowed", fn_name, node.lineno)
            if not isinstance(node.ctx, ast.Load):
                raise ProgramError("attribute assignment not allowed", fn_name, node.lineno)
        if isinstance(node, ast.FunctionDef) and node is not tree:
            raise ProgramError("nested function definitions not allowed", fn_name, node.lineno)


def parse_function(source: str) -> RestrictedFunction:
    """Validate source as exactly one restricted top-level function."""
    try:
        module = ast.parse(source)
    except SyntaxError as exc:
        raise ProgramError(f"syntax error: {exc.msg}", "?", exc.lineno) from exc
    defs = [n for n in module.body if isinstance(n, ast.FunctionDef)]
    if len(defs) != 1 or len(module.body) != 1:
        raise ProgramError("expected exactly one top-level function definition")
    fn = defs[0]
    args = fn.args
    if args.vararg or args.kwarg or args.kwonlyargs or args.posonlyargs:
        raise ProgramError("only plain positional parameters are allowed", fn.name, fn.lineno)
    _validate_tree(fn, fn.name)
    doc = ast.get_docstring(fn) or ""
    return RestrictedFunction(
        name=fn.name,
        params=tuple(a.arg for a in args.args),
        defaults=tuple(ast.literal_eval(d) for d in args.defaults),
        doc=doc,
        source=source,
        tree=fn,
    )


def count_llm_calls(fn: RestrictedFunction) -> int:
    """Static count of call_LLM sites in the body."""
    return sum(
        1
        for node in ast.walk(fn.tree)
        if isinstance(node, ast.Call) and isinstance(node.func, ast.Name) and node.func.id == "call_LLM"
    )


class _Return(Exception):
    def __init__(self, value):
        self.value = value


class _Break(Exception):
    pass


class _Continue(Exception):
    pass


class _Lambda:
    def __init__(self, node: ast.Lambda, env: dict, interp: "Interpreter", fn_name: str):
        self.node = node
        self.env = env
        self.interp = interp
        self.fn_name = fn_name

    def __call__(self, *args):
        params = [a.arg for a in self.node.args.args]
        if len(args) != len(params):
            raise ProgramError(f"lambda expects {len(params)} args, got {len(args)}", self.fn_name)
        local = dict(self.env)
        local.update(zip(params, args))
        return self.interp._eval(self.node.body, local, self.fn_name)


class Interpreter:
    def __init__(self, program: Program, call_llm=None, extra_builtins=None, step_budget: int = 2_000_000):
        self.program = program
        self.call_llm = call_llm
        self.step_budget = step_budget
        self.steps = 0
        self.builtins = dict(SAFE_BUILTINS)
        if extra_builtins:
            self.builtins.update(extra_builtins)

    def call(self, name: str, *args):
        fn = self.program.functions.get(name)
        if fn is None:
            raise ProgramError(f"unknown function {name!r}")
        n_required = len(fn.params) - len(fn.defaults)
        if not (n_required <= len(args) <= len(fn.params)):
            raise ProgramError(f"{name} expects {len(fn.params)} args, got {len(args)}", name)
        env = dict(zip(fn.params, args))
        for param, default in zip(fn.params[n_required:], fn.defaults):
            env.setdefault(param, default)
        try:
            for stmt in fn.tree.body:
                self._exec(stmt, env, fn.name)
        except _Return as r:
            return r.value
        return None

    def run_main(self, *args):
        return self.call(self.program.main, *args)

    # -- execution ---------------------------------------------------------

    def _tick(self, node, fn_name):
        self.steps += 1
        if self.steps > self.step_budget:
            raise ProgramError("step budget exceeded", fn_name, getattr(node, "lineno", None))

    def _exec(self, node: ast.stmt, env: dict, fn_name: str) -> None:
        self._tick(node, fn_name)
        if isinstance(node, ast.Return):
            raise _Return(self._eval(node.value, env, fn_name) if node.value else None)
        if isinstance(node, ast.Assign):
            value = self._eval(node.value, env, fn_name)
            for target in node.targets:
                self._assign(target, value, env, fn_name)
            return
        if isinstance(node, ast.AnnAssign):
            if node.value is not None:
                self._assign(node.target, self._eval(node.value, env, fn_name), env, fn_name)
            return
        if isinstance(node, ast.AugAssign):
            current = self._eval_target(node.target, env, fn_name)
            value = self._binop(node.op, current, self._eval(node.value, env, fn_name), fn_name, node)
            self._assign(node.target, value, env, fn_name)
            return
        if isinstance(node, ast.Expr):
            self._eval(node.value, env, fn_name)
            return
        if isinstance(node, ast.If):
            branch = node.body if self._eval(node.test, env, fn_name) else node.orelse
            for stmt in branch:
                self._exec(stmt, env, fn_name)
            return
        if isinstance(node, ast.For):
            iterable = self._eval(node.iter, env, fn_name)
            for item in iterable:
                self._tick(node, fn_name)
                self._assign(node.target, item, env, fn_name)
                try:
                    for stmt in node.body:
                        self._exec(stmt, env, fn_name)
                except _Break:
                    break
                except _Continue:
                    continue
            else:
                for stmt in node.orelse:
                    self._exec(stmt, env, fn_name)
            return
        if isinstance(node, ast.While):
            while self._eval(node.test, env, fn_name):
                self._tick(node, fn_name)
                try:
                    for stmt in node.body:
                        self._exec(stmt, env, fn_name)
                except _Break:
                    break
                except _Continue:
                    continue
            return
        if isinstance(node, ast.Break):
            raise _Break()
        if isinstance(node, ast.Continue):
            raise _Continue()
        if isinstance(node, ast.Pass):
            return
        raise ProgramError(f"unsupported statement {type(node).__name__}", fn_name, node.lineno)

    def _assign(self, target: ast.expr, value, env: dict, fn_name: str) -> None:
        if isinstance(target, ast.Name):
            env[target.id] = value
            return
        if isinstance(target, (ast.Tuple, ast.List)):
            values = list(value)
            if len(values) != len(target.elts):
                raise ProgramError("unpacking arity mismatch", fn_name, target.lineno)
            for sub, v in zip(target.elts, values):
                self._assign(sub, v, env, fn_name)
            return
        if isinstance(target, ast.Subscript):
            obj = self._eval(target.value, env, fn_name)
            key = self._eval(target.slice, env, fn_name)
            try:
                obj[key] = value
            except Exception as exc:
                raise ProgramError(f"subscript assignment failed: {exc}", fn_name, target.lineno) from exc
            return
        raise ProgramError(f"cannot assign to {type(target).__name__}", fn_name, target.lineno)

    def _eval_target(self, target: ast.expr, env: dict, fn_name: str):
        return self._eval(target, env, fn_name)

    # -- expressions -------------------------------------------------------

    def _eval(self, node: ast.expr, env: dict, fn_name: str):
        self._tick(node, fn_name)
        if isinstance(node, ast.Constant):
            return node.value
        if isinstance(node, ast.Name):
            if node.id in env:
                return env[node.id]
            if node.id == "call_LLM":
                if self.call_llm is None:
                    raise ProgramError("call_LLM used but no client configured", fn_name, node.lineno)
                return self.call_llm
            if node.id in self.program.functions:
                return lambda *args, _n=node.id: self.call(_n, *args)
            if node.id in self.builtins:
                return self.builtins[node.id]
            raise ProgramError(f"undefined name {node.id!r}", fn_name, node.lineno)
        if isinstance(node, ast.List):
            return [self._eval(e, env, fn_name) for e in node.elts]
        if isinstance(node, ast.Tuple):
            return tuple(self._eval(e, env, fn_name) for e in node.elts)
        if isinstance(node, ast.Set):
            return {self._eval(e, env, fn_name) for e in node.elts}
        if isinstance(node, ast.Dict):
            return {
                self._eval(k, env, fn_name): self._eval(v, env, fn_name)
                for k, v in zip(node.keys, node.values)
            }
        if isinstance(node, ast.BinOp):
            left = self._eval(node.left, env, fn_name)
            right = self._eval(node.right, env, fn_name)
            return self._binop(node.op, left, right, fn_name, node)
        if isinstance(node, ast.UnaryOp):
            value = self._eval(node.operand, env, fn_name)
            if isinstance(node.op, ast.USub):
                return -value
            if isinstance(node.op, ast.UAdd):
                return +value
            if isinstance(node.op, ast.Not):
                return not value
            raise ProgramError(f"unsupported unary op {type(node.op).__name__}", fn_name, node.lineno)
        if isinstance(node, ast.BoolOp):
            if isinstance(node.op, ast.And):
                result = True
                for value_node in node.values:
                    result = self._eval(value_node, env, fn_name)
                    if not result:
                        return result
                return result
            result = False
            for value_node in node.values:
                result = self._eval(value_node, env, fn_name)
                if result:
                    return result
            return result
        if isinstance(node, ast.Compare):
            left = self._eval(node.left, env, fn_name)
            for op, comparator in zip(node.ops, node.comparators):
                right = self._eval(comparator, env, fn_name)
                if not self._compare(op, left, right, fn_name, node):
                    return False
                left = right
            return True
        if isinstance(node, ast.IfExp):
            test = self._eval(node.test, env, fn_name)
            return self._eval(node.body if test else node.orelse, env, fn_name)
        if isinstance(node, ast.Call):
            return self._call(node, env, fn_name)
        if isinstance(node, ast.Attribute):
            obj = self._eval(node.value, env, fn_name)
            for typ, names in _METHODS.items():
                if isinstance(obj, typ):
                    if node.attr in names:
                        return getattr(obj, node.attr)
                    raise ProgramError(
                        f"method {node.attr!r} not allowed on {typ.__name__}", fn_name, node.lineno
                    )
            raise ProgramError(f"attribute access on {type(obj).__name__} not allowed", fn_name, node.lineno)
        if isinstance(node, ast.Subscript):
            obj = self._eval(node.value, env, fn_name)
            key = self._eval(node.slice, env, fn_name)
            try:
                return obj[key]
            except Exception as exc:
                raise ProgramError(f"subscript failed: {exc}", fn_name, node.lineno) from exc
        if isinstance(node, ast.Slice):
            return slice(
                self._eval(node.lower, env, fn_name) if node.lower else None,
                self._eval(node.upper, env, fn_name) if node.upper else None,
                self._eval(node.step, env, fn_name) if node.step else None,
            )
        if isinstance(node, (ast.ListComp, ast.SetComp, ast.GeneratorExp)):
            items = self._comprehension(node.generators, node.elt, env, fn_name)
            return set(items) if isinstance(node, ast.SetComp) else items
        if isinstance(node, ast.DictComp):
            out = {}
            for scope in self._comp_scopes(node.generators, env, fn_name):
                out[self._eval(node.key, scope, fn_name)] = self._eval(node.value, scope, fn_name)
            return out
        if isinstance(node, ast.JoinedStr):
            parts = []
            for piece in node.values:
                if isinstance(piece, ast.FormattedValue):
                    value = self._eval(piece.value, env, fn_name)
                    spec = ""
                    if piece.format_spec is not None:
                        spec = self._eval(piece.format_spec, env, fn_name)
                    parts.append(format(value, spec))
                else:
                    parts.append(piece.value)
            return "".join(parts)
        if isinstance(node, ast.Lambda):
            return _Lambda(node, dict(env), self, fn_name)
        raise ProgramError(f"unsupported expression {type(node).__name__}", fn_name, getattr(node, "lineno", None))

    def _comp_scopes(self, generators, env, fn_name):
        def recurse(gens, scope):
            if not gens:
                yield scope
                return
            gen = gens[0]
            for item in self._eval(gen.iter, scope, fn_name):
                self._tick(gen.iter, fn_name)
                inner = dict(scope)
                self._assign(gen.target, item, inner, fn_name)
                if all(self._eval(cond, inner, fn_name) for cond in gen.ifs):
                    yield from recurse(gens[1:], inner)

        yield from recurse(list(generators), dict(env))

    def _comprehension(self, generators, elt, env, fn_name) -> list:
        return [self._eval(elt, scope, fn_name) for scope in self._comp_scopes(generators, env, fn_name)]

    def _call(self, node: ast.Call, env: dict, fn_name: str):
        func = self._eval(node.func, env, fn_name)
        args = []
        for a in node.args:
            if isinstance(a, ast.Starred):
                args.extend(self._eval(a.value, env, fn_name))
            else:
                args.append(self._eval(a, env, fn_name))
        kwargs = {kw.arg: self._eval(kw.value, env, fn_name) for kw in node.keywords}
        try:
            return func(*args, **kwargs)
        except ProgramError:
            raise
        except (_Return, _Break, _Continue):
            raise
        except Exception as exc:
            raise ProgramError(f"call failed: {exc}", fn_name, node.lineno) from exc

    def _binop(self, op, left, right, fn_name, node):
        try:
            if isinstance(op, ast.Add):
                return left + right
            if isinstance(op, ast.Sub):
                return left - right
            if isinstance(op, ast.Mult):
                return left * right
            if isinstance(op, ast.Div):
                return left / right
            if isinstance(op, ast.FloorDiv):
                return left // right
            if isinstance(op, ast.Mod):
                return left % right
            if isinstance(op, ast.Pow):
                return left**right
        except ProgramError:
            raise
        except Exception as exc:
            raise ProgramError(f"arithmetic failed: {exc}", fn_name, getattr(node, "lineno", None)) from exc
        raise ProgramError(f"unsupported operator {type(op).__name__}", fn_name, getattr(node, "lineno", None))

    def _compare(self, op, left, right, fn_name, node) -> bool:
        try:
            if isinstance(op, ast.Eq):
                return left == right
            if isinstance(op, ast.NotEq):
                return left != right
            if isinstance(op, ast.Lt):
                return left < right
            if isinstance(op, ast.LtE):
                return left <= right
            if isinstance(op, ast.Gt):
                return left > right
            if isinstance(op, ast.GtE):
                return left >= right
            if isinstance(op, ast.In):
                return left in right
            if isinstance(op, ast.NotIn):
                return left not in right
            if isinstance(op, ast.Is):
                return left is right
            if isinstance(op, ast.IsNot):
                return left is not right
        except ProgramError:
            raise
        except Exception as exc:
            raise ProgramError(f"comparison failed: {exc}", fn_name, getattr(node, "lineno", None)) from exc
        raise ProgramError(f"unsupported comparison {type(op).__name__}", fn_name, getattr(node, "lineno", None))

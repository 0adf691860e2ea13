"""The invariant KMS state on the Cuntz-Pimsner algebra.

Monomials are first brought to normal order (creations left of annihilations)
with the quotient relation s_j^* s_i = delta_ij - q sum_kl a_jk conj(a_il) s_k s_l^*,
then evaluated through psi_k(pi_k(.)) on a window of fiber levels.
"""
from __future__ import annotations

import re
import weakref
from dataclasses import dataclass
from typing import Iterator

import numpy as np

from .chain import Chain
from .errors import FormError, InputError, RangeError
from .fock import GradedOp, creation_left
from .qarith import q_int
from .tlpoly import TLData

Letter = tuple[int, bool]  # (generator index starting at 1, starred)

_TOKEN = re.compile(r"^(\d+)(\*?)$")


@dataclass(frozen=True)
class Word:
    """A monomial in s_1, ..., s_m and their adjoints, read left to right."""

    letters: tuple[Letter, ...] = ()

    @classmethod
    def parse(cls, text: str) -> "Word":
        """Parse whitespace-separated tokens like ``"1 2*"`` (s_1 s_2^*)."""
        letters = []
        for tok in text.split():
            hit = _TOKEN.match(tok)
            if not hit or int(hit.group(1)) < 1:
                raise InputError(f"bad letter {tok!r}")
            letters.append((int(hit.group(1)), hit.group(2) == "*"))
        return cls(tuple(letters))

    @property
    def creations(self) -> int:
        return sum(1 for _, star in self.letters if not star)

    @property
    def annihilations(self) -> int:
        return sum(1 for _, star in self.letters if star)

    @property
    def degree(self) -> int:
        return max(self.creations, self.annihilations)

    @property
    def balanced(self) -> bool:
        return self.creations == self.annihilations

    def is_normal(self) -> bool:
        """True when no unstarred letter follows a starred one."""
        seen_star = False
        for _, star in self.letters:
            if star:
                seen_star = True
            elif seen_star:
                return False
        return True

    def adjoint(self) -> "Word":
        return Word(tuple((i, not s) for i, s in reversed(self.letters)))

    def __mul__(self, other: "Word") -> "Word":
        return Word(self.letters + other.letters)

    def __len__(self) -> int:
        return len(self.letters)

    def __str__(self) -> str:
        return " ".join(f"{i}{'*' if s else ''}" for i, s in self.letters) or "1"


@dataclass(frozen=True)
class KmsConfig:
    k_margin: int = 2
    stabilization_span: int = 3

    def __post_init__(self):
        if self.k_margin < 1:
            raise InputError("k_margin must be at least 1")
        if self.stabilization_span < 1:
            raise InputError("stabilization_span must be at least 1")


@dataclass(frozen=True)
class OmegaValue:
    value: complex
    stabilization_residual: float
    levels: tuple[int, ...]
    closed_form: complex | None = None
    closed_form_residual: float | None = None


@dataclass(frozen=True)
class NormalForm:
    """s_xi s_eta^* with xi in H_p and eta in H_r, in chain coordinates."""

    p: int
    r: int
    xi: np.ndarray
    eta: np.ndarray


def woronowicz_rho(t: TLData) -> np.ndarray:
    if not t.standard_form:
        raise FormError("the Woronowicz character is only available in standard form")
    return np.diag(np.abs(t.anti_diagonal()) ** 2).astype(np.complex128)


_LEFT_CACHE: "weakref.WeakKeyDictionary[Chain, list[GradedOp]]" = weakref.WeakKeyDictionary()
_RHO_CACHE: "weakref.WeakKeyDictionary[Chain, dict[int, np.ndarray]]" = weakref.WeakKeyDictionary()


def _left_family(c: Chain) -> list[GradedOp]:
    ops = _LEFT_CACHE.get(c)
    if ops is None:
        ops = [creation_left(c, i) for i in range(1, c.m + 1)]
        _LEFT_CACHE[c] = ops
    return ops


def _check_letters(c: Chain, w: Word) -> None:
    for i, _ in w.letters:
        if not 1 <= i <= c.m:
            raise InputError(f"generator index {i} outside 1..{c.m}")


def pi_k_eval(c: Chain, w: Word, k: int) -> np.ndarray:
    """Matrix of the Toeplitz monomial w (left creation operators) restricted to H_k."""
    _check_letters(c, w)
    if not 0 <= k <= c.N_full:
        raise RangeError(f"level {k} outside 0..{c.N_full}")
    L = _left_family(c)
    target = k + w.creations - w.annihilations
    out_dim = c.dims[target] if 0 <= target < len(c.dims) else 0
    mat = np.eye(c.dims[k], dtype=np.complex128)
    level = k
    for i, star in reversed(w.letters):
        if star:
            if level == 0:
                return np.zeros((out_dim, c.dims[k]), dtype=np.complex128)
            mat = L[i - 1].block(level - 1).conj().T @ mat
            level -= 1
        else:
            if level + 1 > c.N_full:
                raise RangeError(f"word climbs to level {level + 1} above N_full={c.N_full}")
            mat = L[i - 1].block(level) @ mat
            level += 1
    return mat


def _rho_level(c: Chain, t: TLData, k: int) -> np.ndarray:
    per_chain = _RHO_CACHE.setdefault(c, {})
    if k not in per_chain:
        diag = np.ones(1)
        rho = np.abs(t.anti_diagonal()) ** 2
        for _ in range(k):
            diag = np.kron(diag, rho)
        iota = c.iota(k)
        per_chain[k] = (iota.conj().T * diag) @ iota
    return per_chain[k]


def psi_k(c: Chain, t: TLData, mat: np.ndarray, k: int) -> complex:
    """Tr(rho_{U_k} mat) / [k+1]_q for a d_k x d_k matrix."""
    return complex(np.trace(_rho_level(c, t, k) @ mat) / q_int(k + 1, t.q))


def normal_order(t: TLData, w: Word) -> dict[Word, complex]:
    """Expand w in the quotient into normal-ordered words with coefficients."""
    A, q = t.A, t.q
    m = t.m
    done: dict[Word, complex] = {}
    stack: list[tuple[Word, complex]] = [(w, 1.0 + 0j)]
    while stack:
        word, coeff = stack.pop()
        letters = word.letters
        pos = next((p for p in range(len(letters) - 1) if letters[p][1] and not letters[p + 1][1]), None)
        if pos is None:
            done[word] = done.get(word, 0j) + coeff
            continue
        j, i = letters[pos][0], letters[pos + 1][0]
        head, tail = letters[:pos], letters[pos + 2:]
        if i == j:
            stack.append((Word(head + tail), coeff))
        for k in range(m):
            ajk = A[j - 1, k]
            if ajk == 0:
                continue
            for l in range(m):
                ail = A[i - 1, l]
                if ail == 0:
                    continue
                stack.append((Word(head + ((k + 1, False), (l + 1, True)) + tail), -q * coeff * ajk * np.conj(ail)))
    return {wd: cf for wd, cf in done.items() if cf != 0}


def _window(c: Chain, degree: int, cfg: KmsConfig) -> tuple[int, ...]:
    lo = degree + cfg.k_margin
    ks = tuple(range(lo, lo + cfg.stabilization_span))
    if ks[-1] > c.N_full:
        raise RangeError(f"stabilization window up to level {ks[-1]} exceeds N_full={c.N_full}")
    return ks


def _multi_index(letters: list[int], m: int) -> int:
    idx = 0
    for i in letters:
        idx = idx * m + (i - 1)
    return idx


def _projection_entry(c: Chain, J: list[int], I: list[int]) -> complex:
    """(f_n e_I, e_J) with tensor factors ordered left to right."""
    n = len(I)
    if n == 0:
        return 1.0 + 0j
    iota = c.iota(n)
    return complex(iota[_multi_index(J, c.m)] @ iota[_multi_index(I, c.m)].conj())


def closed_form(c: Chain, t: TLData, w: Word) -> complex | None:
    """Closed-form value for s_I s_J^* and s_J^* s_I patterns, None otherwise."""
    _check_letters(c, w)
    if not w.letters:
        return 1.0 + 0j
    if not w.balanced:
        return 0j
    n = w.creations
    head, tail = w.letters[:n], w.letters[n:]
    a = np.abs(t.anti_diagonal()) ** 2
    if not any(s for _, s in head) and all(s for _, s in tail):
        I = [i for i, _ in head]
        J = [j for j, _ in reversed(tail)]
        weight = float(np.prod([a[j - 1] for j in J]))
        return weight / q_int(n + 1, t.q) * _projection_entry(c, J, I)
    if all(s for _, s in head) and not any(s for _, s in tail):
        J = [j for j, _ in reversed(head)]
        I = [i for i, _ in tail]
        return t.q ** (-n) / q_int(n + 1, t.q) * _projection_entry(c, J, I)
    return None


def normal_form(c: Chain, w: Word) -> NormalForm | None:
    """Vectors (xi, eta) with w = s_xi s_eta^*, when w is normal-ordered."""
    _check_letters(c, w)
    if not w.is_normal():
        return None
    p = w.creations
    I = [i for i, _ in w.letters[:p]]
    J = [j for j, _ in reversed(w.letters[p:])]
    xi = c.iota(p)[[_multi_index(I, c.m)]].conj().T if p else np.ones((1, 1), dtype=np.complex128)
    r = len(J)
    eta = c.iota(r)[[_multi_index(J, c.m)]].conj().T if r else np.ones((1, 1), dtype=np.complex128)
    return NormalForm(p, r, xi, eta)


def omega_vectors(t: TLData, c: Chain, nf: NormalForm) -> complex:
    """(rho_{U_p} xi, eta) / [p+1]_q, zero unless p = r."""
    if nf.p != nf.r:
        return 0j
    return complex((nf.eta.conj().T @ _rho_level(c, t, nf.p) @ nf.xi)[0, 0] / q_int(nf.p + 1, t.q))


def omega(t: TLData, c: Chain, w: Word, cfg: KmsConfig = KmsConfig()) -> OmegaValue:
    """Evaluate the state on w with a stabilization window and closed-form check."""
    if not t.standard_form:
        raise FormError("the KMS state needs the anti-diagonal standard form")
    _check_letters(c, w)
    cf = closed_form(c, t, w)
    if not w.balanced:
        res = None if cf is None else abs(cf)
        return OmegaValue(0j, 0.0, (), cf, res)
    terms = normal_order(t, w)
    degree = max((wd.creations for wd in terms), default=0)
    ks = _window(c, degree, cfg)
    values = []
    for k in ks:
        total = 0j
        for wd, coeff in terms.items():
            if wd.balanced:
                total += coeff * psi_k(c, t, pi_k_eval(c, wd, k), k)
        values.append(total)
    spread = max(abs(x - y) for x in values for y in values)
    res = None if cf is None else abs(values[-1] - cf)
    return OmegaValue(values[-1], float(spread), ks, cf, res)


def sigma_factor(t: TLData, w: Word) -> float:
    """Scalar by which sigma_{-i} multiplies the monomial w."""
    weights = t.q * np.abs(t.anti_diagonal()) ** 2
    out = 1.0
    for i, star in w.letters:
        out *= 1.0 / weights[i - 1] if star else weights[i - 1]
    return out


def kms_check(t: TLData, c: Chain, x: Word, y: Word, cfg: KmsConfig = KmsConfig()) -> float:
    """|omega(x sigma_{-i}(y)) - omega(y x)|."""
    lhs = sigma_factor(t, y) * omega(t, c, x * y, cfg).value
    rhs = omega(t, c, y * x, cfg).value
    return float(abs(lhs - rhs))


def random_word(rng: np.random.Generator, m: int, length: int) -> Word:
    idx = rng.integers(1, m + 1, size=length)
    stars = rng.integers(0, 2, size=length).astype(bool)
    return Word(tuple((int(i), bool(s)) for i, s in zip(idx, stars)))


def random_pairs(m: int, count: int, max_degree: int = 3, seed: int = 0) -> Iterator[tuple[Word, Word]]:
    """Seeded pairs (x, y) of words with at most max_degree letters each.

    Most pairs are chosen so that xy is gauge balanced, since the other ones
    are trivially zero on both sides.
    """
    rng = np.random.default_rng(seed)
    for _ in range(count):
        x = random_word(rng, m, int(rng.integers(0, max_degree + 1)))
        imbalance = x.creations - x.annihilations
        if rng.random() < 0.8 and abs(imbalance) <= max_degree:
            # y must carry the opposite imbalance
            options = [n for n in range(abs(imbalance), max_degree + 1) if (n - abs(imbalance)) % 2 == 0]
            ly = int(rng.choice(options))
            n_star = (ly + imbalance) // 2
            stars = np.zeros(ly, dtype=bool)
            stars[rng.permutation(ly)[:n_star]] = True
            idx = rng.integers(1, m + 1, size=ly)
            y = Word(tuple((int(i), bool(s)) for i, s in zip(idx, stars)))
        else:
            y = random_word(rng, m, int(rng.integers(0, max_degree + 1)))
        yield x, y


def all_words(m: int, length: int) -> Iterator[Word]:
    """Every word with exactly ``length`` letters."""
    if length == 0:
        yield Word()
        return
    for shorter in all_words(m, length - 1):
        for i in range(1, m + 1):
            for star in (False, True):
                yield shorter * Word(((i, star),))


def normal_monomials(m: int, n: int) -> Iterator[Word]:
    """All s_I s_J^* and s_J^* s_I with |I| = |J| = n."""
    for I in np.ndindex(*(m,) * n):
        for J in np.ndindex(*(m,) * n):
            create = tuple((i + 1, False) for i in I)
            kill = tuple((j + 1, True) for j in J)
            yield Word(create + kill)
            if n:
                yield Word(kill + create)

/**
 * Exact rational values as they travel over the wire.
 *
 * The gateway speaks strings like "3", "1/3", "22/7".  Everything the
 * console shows or submits goes through parse/format so no value is ever
 * coerced through a float.
 */

export interface Rational {
  readonly num: bigint;
  readonly den: bigint;
}

const INT_RE = /^-?\d+$/;
const FRAC_RE = /^(-?\d+)\/(-?\d+)$/;

function gcd(a: bigint, b: bigint): bigint {
  a = a < 0n ? -a : a;
  b = b < 0n ? -b : b;
  while (b) {
    [a, b] = [b, a % b];
  }
  return a;
}

function normalize(num: bigint, den: bigint): Rational {
  if (den === 0n) {
    throw new Error("zero denominator");
  }
  if (den < 0n) {
    num = -num;
    den = -den;
  }
  const g = gcd(num, den);
  return g === 0n ? { num: 0n, den: 1n } : { num: num / g, den: den / g };
}

/** Parse a wire-format rational string.  Floats and junk are rejected. */
export function parseRational(text: string): Rational {
  const s = text.trim();
  if (INT_RE.test(s)) {
    return { num: BigInt(s), den: 1n };
  }
  const m = FRAC_RE.exec(s);
  if (!m) {
    throw new Error(`not a rational value: ${JSON.stringify(text)}`);
  }
  return normalize(BigInt(m[1]!), BigInt(m[2]!));
}

/** Canonical wire form: lowest terms, "p" when the denominator is 1. */
export function formatRational(r: Rational): string {
  const c = normalize(r.num, r.den);
  return c.den === 1n ? c.num.toString() : `${c.num}/${c.den}`;
}

/** Round-trip a user-entered value to canonical wire form, validating it. */
export function canonicalize(text: string): string {
  return formatRational(parseRational(text));
}

export function isNonnegative(r: Rational): boolean {
  return r.num >= 0n;
}

export function equals(a: Rational, b: Rational): boolean {
  return a.num * b.den === b.num * a.den;
}

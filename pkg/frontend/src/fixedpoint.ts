// Fixed-point decimals: integers scaled by 10^6, matching the chain's
// market arithmetic. Only parsing and display live here; the client never
// recomputes market outcomes.

export const SCALE = 1_000_000;

export function parseFp(text: string): number {
  const s = text.trim();
  const neg = s.startsWith("-");
  const t = neg ? s.slice(1) : s;
  const m = /^(\d*)(?:\.(\d{0,6}))?$/.exec(t);
  if (!m || (!m[1] && !m[2])) throw new Error(`bad decimal: ${text}`);
  const whole = m[1] ? parseInt(m[1], 10) : 0;
  const frac = m[2] ? parseInt(m[2].padEnd(6, "0"), 10) : 0;
  const v = whole * SCALE + frac;
  return neg ? -v : v;
}

export function formatFp(v: number): string {
  const sign = v < 0 ? "-" : "";
  const a = Math.abs(v);
  return `${sign}${Math.floor(a / SCALE)}.${String(a % SCALE).padStart(6, "0")}`;
}

// "0.333300" -> "33.33%" for dashboards.
export function fpPercent(text: string): string {
  const v = parseFp(text);
  return `${((100 * v) / SCALE).toFixed(2)}%`;
}

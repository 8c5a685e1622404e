// Client-side MAC validation with the same grammar as the server:
// six hex pairs separated by ':' or '-', any letter case.

const HEX_PAIR = /^[0-9a-fA-F]{2}$/;

/** Canonical uppercase-colon form, or null when the text is not a MAC. */
export function normalizeMac(text: string): string | null {
  const groups = text.trim().split(/[:-]/);
  if (groups.length !== 6) return null;
  if (!groups.every((g) => HEX_PAIR.test(g))) return null;
  return groups.map((g) => g.toUpperCase()).join(":");
}

export function isValidMac(text: string): boolean {
  return normalizeMac(text) !== null;
}

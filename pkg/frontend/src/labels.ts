// Annotation labels hover above their objects; overlapping labels stack
// vertically (newest pushed up) so none is hidden.

export interface LabelInput {
  objectId: string;
  text: string;
  x: number; // projected anchor, pixels
  y: number;
  depth: number;
}

export interface PlacedLabel extends LabelInput {
  width: number;
  height: number;
}

export const LABEL_HEIGHT = 22;
const LABEL_PADDING = 12;
const MAX_TEXT = 40;
const CHAR_WIDTH = 7.2; // monospace estimate; canvas re-measures when drawing

export function labelText(text: string): string {
  return text.length > MAX_TEXT ? text.slice(0, MAX_TEXT - 1) + "…" : text;
}

export function stackLabels(inputs: LabelInput[]): PlacedLabel[] {
  // nearest first so closer labels keep their anchor row
  const ordered = [...inputs].sort((a, b) => a.depth - b.depth);
  const placed: PlacedLabel[] = [];
  for (const input of ordered) {
    const text = labelText(input.text);
    const width = text.length * CHAR_WIDTH + LABEL_PADDING;
    let y = input.y;
    const overlaps = (candidate: number) =>
      placed.some(
        (p) =>
          Math.abs(p.x - input.x) < (p.width + width) / 2 &&
          Math.abs(p.y - candidate) < LABEL_HEIGHT,
      );
    while (overlaps(y)) y -= LABEL_HEIGHT;
    placed.push({ ...input, text, width, height: LABEL_HEIGHT, y });
  }
  return placed;
}

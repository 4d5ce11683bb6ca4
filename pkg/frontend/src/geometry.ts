// Canvas geometry mirrored from the server: same constants, same
// 4-decimal quantization, so replicas compute bit-identical doubles.

export interface Vec2 { x: number; y: number; }
export interface RectV { min: Vec2; max: Vec2; }

export const NOTE_WIDTH = 120;
export const NOTE_HEIGHT = 120;
export const SNAP_DISTANCE = 40;
export const PANEL_MARGIN = 20;
export const LABEL_SPACING = 24;
export const MAX_COORD = 1e9;

export const NOTE_PALETTE = [
    '#f5d547', '#f2a0c0', '#8fd694', '#7fb3e8',
    '#f4a259', '#b58fd6', '#66c7c4', '#b8b8b8',
];
export const AVATAR_PALETTE = [
    '#d64545', '#3a6fd8', '#2e9e44', '#e07b28',
    '#8d4fc9', '#1fb5c9', '#d13fa8', '#8a5a36',
];

export function quantize(v: number): number {
    if (!Number.isFinite(v)) return v;
    return Math.floor(v * 10000.0 + 0.5) / 10000.0;
}

export function coordOk(v: number): boolean {
    return typeof v === 'number' && Number.isFinite(v) && Math.abs(v) <= MAX_COORD;
}

export function vec(x: number, y: number): Vec2 {
    return { x: quantize(x), y: quantize(y) };
}

export function vecAdd(a: Vec2, b: Vec2): Vec2 {
    return { x: quantize(a.x + b.x), y: quantize(a.y + b.y) };
}

export function vecOk(v: Vec2): boolean {
    return coordOk(v.x) && coordOk(v.y);
}

export function rect(minX: number, minY: number, maxX: number, maxY: number): RectV {
    return { min: vec(minX, minY), max: vec(maxX, maxY) };
}

export function rectOk(r: RectV): boolean {
    return vecOk(r.min) && vecOk(r.max) && r.min.x <= r.max.x && r.min.y <= r.max.y;
}

export function rectWidth(r: RectV): number { return r.max.x - r.min.x; }
export function rectHeight(r: RectV): number { return r.max.y - r.min.y; }

export function rectCenter(r: RectV): Vec2 {
    return { x: quantize((r.min.x + r.max.x) / 2), y: quantize((r.min.y + r.max.y) / 2) };
}

export function rectContainsPoint(r: RectV, p: Vec2): boolean {
    return r.min.x <= p.x && p.x <= r.max.x && r.min.y <= p.y && p.y <= r.max.y;
}

export function rectContainsRect(outer: RectV, inner: RectV): boolean {
    return outer.min.x <= inner.min.x && outer.min.y <= inner.min.y
        && outer.max.x >= inner.max.x && outer.max.y >= inner.max.y;
}

export function rectExpand(r: RectV, amount: number): RectV {
    return {
        min: { x: quantize(r.min.x - amount), y: quantize(r.min.y - amount) },
        max: { x: quantize(r.max.x + amount), y: quantize(r.max.y + amount) },
    };
}

export function rectUnion(a: RectV, b: RectV): RectV {
    return {
        min: { x: Math.min(a.min.x, b.min.x), y: Math.min(a.min.y, b.min.y) },
        max: { x: Math.max(a.max.x, b.max.x), y: Math.max(a.max.y, b.max.y) },
    };
}

export function rectTranslate(r: RectV, delta: Vec2): RectV {
    return { min: vecAdd(r.min, delta), max: vecAdd(r.max, delta) };
}

export function noteRect(position: Vec2): RectV {
    const hw = NOTE_WIDTH / 2, hh = NOTE_HEIGHT / 2;
    return {
        min: { x: quantize(position.x - hw), y: quantize(position.y - hh) },
        max: { x: quantize(position.x + hw), y: quantize(position.y + hh) },
    };
}

export function pinAnchor(position: Vec2): Vec2 {
    return { x: position.x, y: quantize(position.y - NOTE_HEIGHT / 2) };
}

export function panelFit(rects: RectV[], margin: number = PANEL_MARGIN): RectV {
    if (!rects.length) throw new Error('panelFit requires at least one rect');
    let box = rects[0];
    for (let i = 1; i < rects.length; i++) box = rectUnion(box, rects[i]);
    return rectExpand(box, margin);
}

export function labelOffsets(count: number, spacing: number = LABEL_SPACING): number[] {
    const out: number[] = [];
    for (let i = 0; i < count; i++) out.push(quantize((i - (count - 1) / 2) * spacing));
    return out;
}

export function labelLayout(start: Vec2, end: Vec2, labelIds: string[], spacing: number = LABEL_SPACING): Array<[string, Vec2]> {
    const mid = { x: quantize((start.x + end.x) / 2), y: quantize((start.y + end.y) / 2) };
    const offsets = labelOffsets(labelIds.length, spacing);
    return labelIds.map((id, i) => [id, { x: mid.x, y: quantize(mid.y + offsets[i]) }]);
}

// Distance from point p to the segment a-b, in the same units as the inputs.
export function segmentDistance(p: Vec2, a: Vec2, b: Vec2): number {
    const dx = b.x - a.x, dy = b.y - a.y;
    const lengthSq = dx * dx + dy * dy;
    let t = lengthSq > 0 ? ((p.x - a.x) * dx + (p.y - a.y) * dy) / lengthSq : 0;
    t = Math.max(0, Math.min(1, t));
    const cx = a.x + t * dx, cy = a.y + t * dy;
    return Math.hypot(p.x - cx, p.y - cy);
}

// Clone indicators and minimap projection, computed locally from the
// replica. Mirrors the server-side derivations.

import {
    RectV, Vec2, noteRect, pinAnchor, quantize, rectExpand, rectUnion,
    rectWidth, rectHeight, AVATAR_PALETTE,
} from './geometry.js';
import { WorkspaceState } from './model.js';

export const MIN_WORLD_EXTENT = 2000;
export const WORLD_PADDING_RATIO = 0.10;
export const CLONE_PULSE_SECONDS = 1.2;

export function normalizeText(s: string): string {
    return s.split(/\s+/u).filter((w) => w.length > 0).join(' ').toLowerCase();
}

export interface CloneIndicatorSet {
    source: string;
    targets: string[];
    active: boolean;
}

export function cloneTargets(state: WorkspaceState, source: string, active = false): CloneIndicatorSet {
    const note = state.notes.get(source);
    if (!note) throw new Error(`unknown note ${source}`);
    const wanted = normalizeText(note.text);
    if (!wanted) return { source, targets: [], active };
    const targets: string[] = [];
    for (const other of state.notes.values()) {
        if (other.id !== source && normalizeText(other.text) === wanted) targets.push(other.id);
    }
    return { source, targets, active };
}

export interface PresenceEntry {
    user: string;
    name: string;
    color: number;
    cursor: Vec2;
    viewport: RectV;
    holding: string | null;
    speaking: boolean;
}

export interface MinimapItem {
    kind: 'note' | 'link' | 'label' | 'panel';
    ref: string;
    creator: string;
    color: number;
    points: Vec2[];
}

export interface MinimapModel {
    scale: number;
    offset: Vec2;
    items: MinimapItem[];
    viewports: Array<{ user: string; min: Vec2; max: Vec2; color: number }>;
}

export function fallbackColor(user: string): number {
    let digest = 0;
    for (let i = 0; i < user.length; i++) digest = (digest * 31 + user.charCodeAt(i)) % 1_000_003;
    return digest % AVATAR_PALETTE.length;
}

export function worldBounds(state: WorkspaceState): RectV {
    let box: RectV | null = null;
    for (const note of state.notes.values()) {
        const r = noteRect(note.position);
        box = box ? rectUnion(box, r) : r;
    }
    for (const panel of state.panels.values()) {
        box = box ? rectUnion(box, panel.bounds) : panel.bounds;
    }
    if (!box) {
        const half = MIN_WORLD_EXTENT / 2;
        return { min: { x: -half, y: -half }, max: { x: half, y: half } };
    }
    const pad = Math.max(rectWidth(box), rectHeight(box)) * WORLD_PADDING_RATIO;
    box = rectExpand(box, pad > 0 ? pad : MIN_WORLD_EXTENT * WORLD_PADDING_RATIO);
    if (rectWidth(box) < MIN_WORLD_EXTENT || rectHeight(box) < MIN_WORLD_EXTENT) {
        const cx = (box.min.x + box.max.x) / 2, cy = (box.min.y + box.max.y) / 2;
        const hw = Math.max(rectWidth(box), MIN_WORLD_EXTENT) / 2;
        const hh = Math.max(rectHeight(box), MIN_WORLD_EXTENT) / 2;
        box = {
            min: { x: quantize(cx - hw), y: quantize(cy - hh) },
            max: { x: quantize(cx + hw), y: quantize(cy + hh) },
        };
    }
    return box;
}

export function minimapProject(
    state: WorkspaceState,
    presence: PresenceEntry[],
    world: RectV,
    minimapSize: Vec2,
    creatorColors?: Map<string, number>,
): MinimapModel {
    const width = rectWidth(world), height = rectHeight(world);
    if (width <= 0 || height <= 0) throw new Error('world bounds must be non-degenerate');
    const scale = Math.min(minimapSize.x / width, minimapSize.y / height);
    const offset = { x: (minimapSize.x - width * scale) / 2, y: (minimapSize.y - height * scale) / 2 };

    const colors = new Map(creatorColors ?? []);
    for (const p of presence) if (!colors.has(p.user)) colors.set(p.user, p.color);
    const colorOf = (user: string) => colors.get(user) ?? fallbackColor(user);

    const project = (pt: Vec2): Vec2 => ({
        x: (pt.x - world.min.x) * scale + offset.x,
        y: (pt.y - world.min.y) * scale + offset.y,
    });

    const items: MinimapItem[] = [];
    for (const note of state.notes.values()) {
        const r = noteRect(note.position);
        items.push({ kind: 'note', ref: note.id, creator: note.creator, color: colorOf(note.creator), points: [project(r.min), project(r.max)] });
    }
    for (const link of state.links.values()) {
        const a = pinAnchor(state.notes.get(link.source)!.position);
        const b = pinAnchor(state.notes.get(link.target)!.position);
        items.push({ kind: 'link', ref: link.id, creator: link.creator, color: colorOf(link.creator), points: [project(a), project(b)] });
    }
    for (const label of state.labels.values()) {
        const link = state.links.get(label.link)!;
        const a = pinAnchor(state.notes.get(link.source)!.position);
        const b = pinAnchor(state.notes.get(link.target)!.position);
        const mid = { x: (a.x + b.x) / 2, y: (a.y + b.y) / 2 };
        items.push({ kind: 'label', ref: label.id, creator: label.creator, color: colorOf(label.creator), points: [project(mid)] });
    }
    for (const panel of state.panels.values()) {
        items.push({ kind: 'panel', ref: panel.id, creator: panel.creator, color: colorOf(panel.creator), points: [project(panel.bounds.min), project(panel.bounds.max)] });
    }
    const viewports = presence.map((p) => ({
        user: p.user,
        min: project(p.viewport.min),
        max: project(p.viewport.max),
        color: p.color,
    }));
    return { scale, offset, items, viewports };
}

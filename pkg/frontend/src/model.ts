// Workspace replica: a faithful mirror of the server's state machine.
// Only server-accepted broadcasts are folded here, in server_seq order,
// so this replica converges byte-for-byte with the server snapshot.

import {
    RectV, Vec2, noteRect, panelFit, quantize, rectContainsPoint,
    rectCenter, rectExpand, rectTranslate, rectUnion, vecAdd, SNAP_DISTANCE,
} from './geometry.js';

export type Orientation = 'forward' | 'reverse';
export type ClipboardKind = 'note' | 'label';

export interface Note {
    id: string;
    text: string;
    color: number;
    position: Vec2;
    creator: string;
    panel: string | null;
}

export interface Link {
    id: string;
    source: string;
    target: string;
    creator: string;
    labels: string[];
}

export interface Label {
    id: string;
    text: string;
    orientation: Orientation;
    creator: string;
    link: string;
}

export interface Panel {
    id: string;
    bounds: RectV;
    creator: string;
    attached: string[];
    autoResize: boolean;
}

export interface GroupSelection {
    owner: string;
    members: Set<string>;
}

export interface ClipboardItem {
    id: string;
    text: string;
    kind: ClipboardKind;
}

export interface WorkspaceState {
    notes: Map<string, Note>;
    links: Map<string, Link>;
    labels: Map<string, Label>;
    panels: Map<string, Panel>;
    groups: Map<string, GroupSelection>;
    clipboard: ClipboardItem[];
    appliedSeq: number;
}

export function emptyState(clipboard: ClipboardItem[] = []): WorkspaceState {
    return {
        notes: new Map(), links: new Map(), labels: new Map(),
        panels: new Map(), groups: new Map(), clipboard: [...clipboard], appliedSeq: 0,
    };
}

// -- operations --------------------------------------------------------------

export interface Payload {
    kind: string;
    [field: string]: unknown;
}

export interface Operation {
    client_id: string;
    client_seq: number;
    actor: string;
    wall_clock_ms: number;
    server_seq: number | null;
    payload: Payload;
}

export function makeOp(clientId: string, clientSeq: number, payload: Payload): Operation {
    return {
        client_id: clientId,
        client_seq: clientSeq,
        actor: clientId,
        wall_clock_ms: Date.now(),
        server_seq: null,
        payload,
    };
}

function makeId(kind: string, clientId: string, counter: number): string {
    return `${kind}:${clientId}:${counter}`;
}

function qvec(v: Vec2): Vec2 {
    return { x: quantize(v.x), y: quantize(v.y) };
}

function qrect(r: RectV): RectV {
    return { min: qvec(r.min), max: qvec(r.max) };
}

export function linkBetween(state: WorkspaceState, a: string, b: string): Link | null {
    for (const link of state.links.values()) {
        if ((link.source === a && link.target === b) || (link.source === b && link.target === a)) return link;
    }
    return null;
}

// Apply one accepted operation in place. The server already validated it;
// a structurally impossible op here means the replica has diverged.
export function applyOp(state: WorkspaceState, op: Operation): void {
    const p = op.payload as any;
    const actor = op.actor;
    switch (p.kind) {
        case 'create_note': {
            const id = makeId('note', op.client_id, op.client_seq);
            state.notes.set(id, {
                id, text: p.text, color: p.color, position: qvec(p.position), creator: actor, panel: null,
            });
            break;
        }
        case 'set_note_text': {
            mustNote(state, p.note).text = p.text;
            break;
        }
        case 'set_note_color': {
            mustNote(state, p.note).color = p.color;
            break;
        }
        case 'move_note': {
            const note = mustNote(state, p.note);
            note.position = qvec(p.position);
            ensureFit(state, note.panel);
            break;
        }
        case 'delete_note':
            deleteNote(state, p.note);
            break;
        case 'create_link': {
            const id = makeId('link', op.client_id, op.client_seq);
            state.links.set(id, { id, source: p.source, target: p.target, creator: actor, labels: [] });
            break;
        }
        case 'delete_link':
            deleteLink(state, p.link);
            break;
        case 'attach_label': {
            const id = makeId('label', op.client_id, op.client_seq);
            state.labels.set(id, {
                id, text: p.text, orientation: (p.orientation ?? 'forward') as Orientation, creator: actor, link: p.link,
            });
            mustLink(state, p.link).labels.push(id);
            break;
        }
        case 'detach_label': {
            const label = mustLabel(state, p.label);
            const link = mustLink(state, label.link);
            link.labels = link.labels.filter((l) => l !== p.label);
            state.labels.delete(p.label);
            break;
        }
        case 'flip_label': {
            const label = mustLabel(state, p.label);
            label.orientation = label.orientation === 'forward' ? 'reverse' : 'forward';
            break;
        }
        case 'set_group': {
            const members = new Set<string>(p.members as string[]);
            if (members.size > 0) {
                state.groups.set(actor, { owner: actor, members });
            } else {
                state.groups.delete(actor);
            }
            break;
        }
        case 'clear_group':
            state.groups.delete(actor);
            break;
        case 'move_group': {
            const group = state.groups.get(actor);
            if (!group) throw new Error(`move_group without a group for ${actor}`);
            const delta = qvec(p.delta);
            const touched: string[] = [];
            for (const member of [...group.members].sort()) {
                const note = mustNote(state, member);
                note.position = vecAdd(note.position, delta);
                if (note.panel !== null && !touched.includes(note.panel)) touched.push(note.panel);
            }
            for (const panelId of touched) ensureFit(state, panelId);
            break;
        }
        case 'create_panel': {
            const id = makeId('panel', op.client_id, op.client_seq);
            state.panels.set(id, { id, bounds: qrect(p.bounds), creator: actor, attached: [], autoResize: true });
            break;
        }
        case 'move_panel': {
            const panel = mustPanel(state, p.panel);
            const delta = qvec(p.delta);
            for (const member of panel.attached) {
                const note = mustNote(state, member);
                note.position = vecAdd(note.position, delta);
            }
            panel.bounds = rectTranslate(panel.bounds, delta);
            ensureFit(state, panel.id);
            break;
        }
        case 'resize_panel': {
            const panel = mustPanel(state, p.panel);
            panel.bounds = qrect(p.bounds);
            panel.autoResize = false;
            break;
        }
        case 'delete_panel': {
            const panel = mustPanel(state, p.panel);
            for (const member of panel.attached) mustNote(state, member).panel = null;
            state.panels.delete(p.panel);
            break;
        }
        case 'attach_note_to_panel': {
            const note = mustNote(state, p.note);
            if (note.panel !== null) detachFromPanel(state, p.note);
            const panel = mustPanel(state, p.panel);
            panel.attached.push(p.note);
            panel.autoResize = true; // attaching re-enables auto resize
            note.panel = p.panel;
            ensureFit(state, p.panel);
            break;
        }
        case 'detach_note_from_panel':
            detachFromPanel(state, p.note);
            break;
        default:
            throw new Error(`unknown payload kind ${p.kind}`);
    }
    state.appliedSeq += 1;
}

function mustNote(state: WorkspaceState, id: string): Note {
    const note = state.notes.get(id);
    if (!note) throw new Error(`replica missing note ${id}`);
    return note;
}

function mustLink(state: WorkspaceState, id: string): Link {
    const link = state.links.get(id);
    if (!link) throw new Error(`replica missing link ${id}`);
    return link;
}

function mustLabel(state: WorkspaceState, id: string): Label {
    const label = state.labels.get(id);
    if (!label) throw new Error(`replica missing label ${id}`);
    return label;
}

function mustPanel(state: WorkspaceState, id: string): Panel {
    const panel = state.panels.get(id);
    if (!panel) throw new Error(`replica missing panel ${id}`);
    return panel;
}

function deleteNote(state: WorkspaceState, noteId: string): void {
    for (const linkId of [...state.links.keys()]) {
        const link = state.links.get(linkId)!;
        if (link.source === noteId || link.target === noteId) deleteLink(state, linkId);
    }
    const note = mustNote(state, noteId);
    if (note.panel !== null) detachFromPanel(state, noteId);
    for (const [owner, group] of [...state.groups.entries()]) {
        if (!group.members.has(noteId)) continue;
        group.members.delete(noteId);
        if (group.members.size === 0) state.groups.delete(owner);
    }
    state.notes.delete(noteId);
}

function deleteLink(state: WorkspaceState, linkId: string): void {
    const link = mustLink(state, linkId);
    for (const labelId of link.labels) state.labels.delete(labelId);
    state.links.delete(linkId);
}

function detachFromPanel(state: WorkspaceState, noteId: string): void {
    const note = mustNote(state, noteId);
    const panel = mustPanel(state, note.panel!);
    panel.attached = panel.attached.filter((n) => n !== noteId);
    note.panel = null;
    ensureFit(state, panel.id);
}

// Mirrors the server rule: auto-resize panels refit exactly; manually
// sized panels grow just enough to keep containing their notes.
function ensureFit(state: WorkspaceState, panelId: string | null): void {
    if (panelId === null) return;
    const panel = mustPanel(state, panelId);
    if (!panel.attached.length) return;
    const rects = panel.attached.map((n) => noteRect(mustNote(state, n).position));
    if (panel.autoResize) {
        panel.bounds = panelFit(rects);
    } else {
        let bounds = panel.bounds;
        for (const r of rects) bounds = rectUnion(bounds, r);
        panel.bounds = bounds;
    }
}

// Which panel captures a note dropped at this position, if any.
export function panelSnap(state: WorkspaceState, drop: Vec2, snapDistance: number = SNAP_DISTANCE): string | null {
    const point = qvec(drop);
    let best: { dist: number; id: string } | null = null;
    for (const panel of state.panels.values()) {
        if (!rectContainsPoint(rectExpand(panel.bounds, snapDistance), point)) continue;
        const c = rectCenter(panel.bounds);
        const dist = (point.x - c.x) ** 2 + (point.y - c.y) ** 2;
        if (best === null || dist < best.dist || (dist === best.dist && panel.id < best.id)) {
            best = { dist, id: panel.id };
        }
    }
    return best ? best.id : null;
}

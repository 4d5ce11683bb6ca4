// Canonical JSON and the snapshot document format, matching the server's
// serialization byte for byte: sorted keys, no whitespace, integral floats
// as integers. Used to prove replica convergence against server snapshots.

import { WorkspaceState, emptyState, ClipboardItem } from './model.js';

export function canonicalJson(value: unknown): string {
    if (value === null || typeof value === 'boolean') return JSON.stringify(value);
    if (typeof value === 'number') {
        if (!Number.isFinite(value)) throw new Error(`non-finite number ${value}`);
        return JSON.stringify(value);
    }
    if (typeof value === 'string') return JSON.stringify(value);
    if (Array.isArray(value)) {
        return '[' + value.map(canonicalJson).join(',') + ']';
    }
    if (typeof value === 'object') {
        const record = value as Record<string, unknown>;
        const keys = Object.keys(record).sort();
        const parts = keys.map((k) => JSON.stringify(k) + ':' + canonicalJson(record[k]));
        return '{' + parts.join(',') + '}';
    }
    throw new Error(`cannot canonicalize ${typeof value}`);
}

export function stateToDoc(state: WorkspaceState): Record<string, unknown> {
    const notes: Record<string, unknown> = {};
    for (const n of state.notes.values()) {
        notes[n.id] = {
            id: n.id, text: n.text, color: n.color,
            position: { x: n.position.x, y: n.position.y },
            creator: n.creator, panel: n.panel,
        };
    }
    const links: Record<string, unknown> = {};
    for (const l of state.links.values()) {
        links[l.id] = { id: l.id, source: l.source, target: l.target, creator: l.creator, labels: [...l.labels] };
    }
    const labels: Record<string, unknown> = {};
    for (const b of state.labels.values()) {
        labels[b.id] = { id: b.id, text: b.text, orientation: b.orientation, creator: b.creator, link: b.link };
    }
    const panels: Record<string, unknown> = {};
    for (const p of state.panels.values()) {
        panels[p.id] = {
            id: p.id,
            bounds: { min: { x: p.bounds.min.x, y: p.bounds.min.y }, max: { x: p.bounds.max.x, y: p.bounds.max.y } },
            attached: [...p.attached], creator: p.creator, auto_resize: p.autoResize,
        };
    }
    const groups: Record<string, unknown> = {};
    for (const g of state.groups.values()) {
        groups[g.owner] = { owner: g.owner, members: [...g.members].sort() };
    }
    return {
        applied_seq: state.appliedSeq,
        notes, links, labels, panels, groups,
        clipboard: state.clipboard.map((c) => ({ id: c.id, text: c.text, kind: c.kind })),
    };
}

export function snapshotBytes(state: WorkspaceState): string {
    return canonicalJson(stateToDoc(state));
}

export function docToState(doc: any): WorkspaceState {
    if (!doc || typeof doc !== 'object') throw new Error('snapshot document must be an object');
    const state = emptyState();
    state.appliedSeq = doc.applied_seq;
    for (const [id, nd] of Object.entries<any>(doc.notes ?? {})) {
        state.notes.set(id, {
            id, text: nd.text, color: nd.color,
            position: { x: nd.position.x, y: nd.position.y },
            creator: nd.creator, panel: nd.panel ?? null,
        });
    }
    for (const [id, ld] of Object.entries<any>(doc.links ?? {})) {
        state.links.set(id, { id, source: ld.source, target: ld.target, creator: ld.creator, labels: [...ld.labels] });
    }
    for (const [id, bd] of Object.entries<any>(doc.labels ?? {})) {
        state.labels.set(id, { id, text: bd.text, orientation: bd.orientation, creator: bd.creator, link: bd.link });
    }
    for (const [id, pd] of Object.entries<any>(doc.panels ?? {})) {
        state.panels.set(id, {
            id,
            bounds: {
                min: { x: pd.bounds.min.x, y: pd.bounds.min.y },
                max: { x: pd.bounds.max.x, y: pd.bounds.max.y },
            },
            attached: [...pd.attached], creator: pd.creator, autoResize: pd.auto_resize,
        });
    }
    for (const [owner, gd] of Object.entries<any>(doc.groups ?? {})) {
        state.groups.set(owner, { owner, members: new Set<string>(gd.members) });
    }
    state.clipboard = (doc.clipboard ?? []).map((c: any): ClipboardItem => ({ id: c.id, text: c.text, kind: c.kind }));
    return state;
}

// Clone indicator and minimap derivations against the replica.

import { readFileSync } from 'node:fs';
import { dirname, join } from 'node:path';
import { fileURLToPath } from 'node:url';
import { describe, expect, it } from 'vitest';
import { cloneTargets, minimapProject, normalizeText, worldBounds, MIN_WORLD_EXTENT } from '../src/awareness.js';
import { docToState } from '../src/canonical.js';
import { applyOp, emptyState, WorkspaceState } from '../src/model.js';
import { canonicalJson } from '../src/canonical.js';

const here = dirname(fileURLToPath(import.meta.url));
const fixture = JSON.parse(readFileSync(join(here, 'fixtures', 'replica_fixture.json'), 'utf-8'));

function fixtureState(): WorkspaceState {
    const state = docToState(fixture.initial_snapshot);
    state.clipboard = fixture.clipboard;
    for (const op of fixture.broadcast_ops) applyOp(state, op);
    return state;
}

function noteState(texts: string[]): WorkspaceState {
    const state = emptyState();
    texts.forEach((text, i) => {
        applyOp(state, {
            client_id: 'u9', client_seq: i + 1, actor: 'u9', wall_clock_ms: 0,
            server_seq: state.appliedSeq + 1,
            payload: { kind: 'create_note', text, color: 0, position: { x: i * 300, y: 0 }, from_clipboard: null },
        });
    });
    return state;
}

describe('normalizeText', () => {
    it('trims, collapses, casefolds', () => {
        expect(normalizeText('  Water\tCycle ')).toBe('water cycle');
        expect(normalizeText('')).toBe('');
        expect(normalizeText(normalizeText(' A  B '))).toBe(normalizeText(' A  B '));
    });
});

describe('cloneTargets', () => {
    it('matches normalized duplicates, excluding self and empty text', () => {
        const state = noteState(['Cats', 'cats ', 'Dogs', 'CATS', '']);
        const ids = [...state.notes.keys()];
        const clones = cloneTargets(state, ids[3]);
        expect(new Set(clones.targets)).toEqual(new Set([ids[0], ids[1]]));
        expect(cloneTargets(state, ids[2]).targets).toEqual([]);
        expect(cloneTargets(state, ids[4]).targets).toEqual([]);
    });

    it('is symmetric', () => {
        const state = noteState(['x', 'X', ' x ']);
        const ids = [...state.notes.keys()];
        for (const a of ids) {
            for (const b of cloneTargets(state, a).targets) {
                expect(cloneTargets(state, b).targets).toContain(a);
            }
        }
    });
});

describe('minimap', () => {
    it('projects every workspace item exactly once', () => {
        const state = fixtureState();
        const model = minimapProject(state, [], worldBounds(state), { x: 200, y: 150 });
        const expected = state.notes.size + state.links.size + state.labels.size + state.panels.size;
        expect(model.items.length).toBe(expected);
        const byKind = new Map<string, number>();
        for (const item of model.items) byKind.set(item.kind, (byKind.get(item.kind) ?? 0) + 1);
        expect(byKind.get('note') ?? 0).toBe(state.notes.size);
        expect(byKind.get('link') ?? 0).toBe(state.links.size);
        expect(byKind.get('label') ?? 0).toBe(state.labels.size);
        expect(byKind.get('panel') ?? 0).toBe(state.panels.size);
    });

    it('uses a uniform centred scale', () => {
        const state = emptyState();
        const world = { min: { x: 0, y: 0 }, max: { x: 1000, y: 1000 } };
        const model = minimapProject(state, [], world, { x: 200, y: 100 });
        expect(model.scale).toBe(0.1);
        expect(model.offset).toEqual({ x: 50, y: 0 });
    });

    it('world bounds never collapse below the default window', () => {
        const box = worldBounds(emptyState());
        expect(box.max.x - box.min.x).toBeGreaterThanOrEqual(MIN_WORLD_EXTENT);
    });
});

describe('canonical json', () => {
    it('sorts keys and emits integral floats as integers', () => {
        expect(canonicalJson({ b: 1, a: 2 })).toBe('{"a":2,"b":1}');
        expect(canonicalJson({ x: 5.0, y: 2.5 })).toBe('{"x":5,"y":2.5}');
        expect(canonicalJson({ t: 'ünïcode' })).toBe('{"t":"ünïcode"}');
    });
});

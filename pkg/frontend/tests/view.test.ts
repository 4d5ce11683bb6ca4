// View math: projection round trips and zoom clamping (release criterion).

import { describe, expect, it } from 'vitest';
import { ViewTransform, MIN_ZOOM, MAX_ZOOM } from '../src/view.js';
import { minimapProject, worldBounds } from '../src/awareness.js';
import { emptyState } from '../src/model.js';

describe('view transform', () => {
    it('unproject(project(p)) is identity within 0.5 px across zoom levels', () => {
        const points = [
            { x: 0, y: 0 }, { x: 123.456, y: -789.012 }, { x: -4000, y: 2500 }, { x: 0.1, y: 0.9 },
        ];
        for (const zoom of [0.1, 1, 10]) {
            const view = new ViewTransform();
            view.zoom = zoom;
            view.pan = { x: -321.5, y: 654.25 };
            for (const p of points) {
                const screen = view.project(p);
                const world = view.unproject(screen);
                // Round-trip through screen space stays within half a pixel.
                expect(Math.abs(view.project(world).x - screen.x)).toBeLessThan(0.5);
                expect(Math.abs(view.project(world).y - screen.y)).toBeLessThan(0.5);
            }
        }
    });

    it('clamps zoom to [0.1, 10]', () => {
        const view = new ViewTransform();
        view.zoomAt({ x: 100, y: 100 }, 1e-9);
        expect(view.zoom).toBe(MIN_ZOOM);
        view.zoomAt({ x: 100, y: 100 }, 1e9);
        expect(view.zoom).toBe(MAX_ZOOM);
    });

    it('keeps the world point under the cursor fixed while zooming', () => {
        const view = new ViewTransform();
        view.pan = { x: 50, y: -20 };
        const cursor = { x: 240, y: 180 };
        const before = view.unproject(cursor);
        view.zoomAt(cursor, 2.5);
        const after = view.unproject(cursor);
        expect(after.x).toBeCloseTo(before.x, 6);
        expect(after.y).toBeCloseTo(before.y, 6);
    });

    it('viewport square tracks pan linearly on the minimap', () => {
        const view = new ViewTransform();
        const state = emptyState();
        const world = worldBounds(state);
        const size = { x: 200, y: 150 };
        const viewportOf = () => {
            const vr = view.visibleWorldRect(800, 600);
            const model = minimapProject(state, [{
                user: 'u1', name: 'me', color: 0, cursor: { x: 0, y: 0 },
                viewport: { min: vr.min, max: vr.max }, holding: null, speaking: false,
            }], world, size);
            return { box: model.viewports[0], scale: model.scale };
        };
        const before = viewportOf();
        view.panBy({ x: -100, y: 0 }); // drag left 100px: world pan moves +100/zoom
        const after = viewportOf();
        const worldShift = 100 / view.zoom;
        expect(after.box.min.x - before.box.min.x).toBeCloseTo(worldShift * before.scale, 6);
        expect(after.box.min.y - before.box.min.y).toBeCloseTo(0, 6);
    });
});

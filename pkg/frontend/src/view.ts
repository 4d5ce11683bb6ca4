// World <-> screen mapping: pan + uniform zoom, zoom clamped to [0.1, 10].

import { Vec2 } from './geometry.js';

export const MIN_ZOOM = 0.1;
export const MAX_ZOOM = 10;

export class ViewTransform {
    pan: Vec2 = { x: 0, y: 0 }; // world coordinate at the screen origin
    zoom = 1;

    project(world: Vec2): Vec2 {
        return { x: (world.x - this.pan.x) * this.zoom, y: (world.y - this.pan.y) * this.zoom };
    }

    unproject(screen: Vec2): Vec2 {
        return { x: screen.x / this.zoom + this.pan.x, y: screen.y / this.zoom + this.pan.y };
    }

    // Zoom by `factor` keeping the world point under `screenPoint` fixed.
    zoomAt(screenPoint: Vec2, factor: number): void {
        const anchor = this.unproject(screenPoint);
        this.zoom = Math.min(MAX_ZOOM, Math.max(MIN_ZOOM, this.zoom * factor));
        this.pan = {
            x: anchor.x - screenPoint.x / this.zoom,
            y: anchor.y - screenPoint.y / this.zoom,
        };
    }

    panBy(screenDelta: Vec2): void {
        this.pan = { x: this.pan.x - screenDelta.x / this.zoom, y: this.pan.y - screenDelta.y / this.zoom };
    }

    // The world rectangle currently visible in a viewport of this pixel size.
    visibleWorldRect(screenW: number, screenH: number): { min: Vec2; max: Vec2 } {
        const min = this.unproject({ x: 0, y: 0 });
        const max = this.unproject({ x: screenW, y: screenH });
        return { min, max };
    }
}

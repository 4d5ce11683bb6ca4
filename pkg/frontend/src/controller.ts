// Interaction state machine: pointer and key events in, operations out.
// Deliberately DOM-free so scripted tests can drive it with synthetic
// events and assert the exact operations emitted. Every user-visible
// mutation goes through session.submit — there is no other write path.

import {
    RectV, Vec2, NOTE_PALETTE, noteRect, pinAnchor, labelLayout,
    rectContainsPoint, segmentDistance, vec,
} from './geometry.js';
import { Label, Link, Note, Panel, panelSnap } from './model.js';
import { UiSession } from './session.js';
import { ViewTransform } from './view.js';

export interface Selection {
    kind: 'note' | 'label' | 'panel';
    id: string;
}

export interface ScreenRect { x: number; y: number; w: number; h: number; }

const DRAG_THRESHOLD_PX = 3;
const PIN_RADIUS_PX = 10;
const LINK_HIT_PX = 10;
const LABEL_W = 72, LABEL_H = 20; // world units of a label marker
const RESIZE_HANDLE_PX = 12;
const PANEL_DEFAULT_W = 360, PANEL_DEFAULT_H = 280;
const PANEL_MIN_SIZE = 40;

// Clipboard strip layout (screen space, below the dashboard strip).
export const CLIPBOARD_X = 8;
export const CLIPBOARD_Y = 96;
export const CLIPBOARD_ITEM_W = 150;
export const CLIPBOARD_ITEM_H = 26;
export const CLIPBOARD_GAP = 6;

type Mode =
    | { kind: 'idle' }
    | { kind: 'pan'; lastScreen: Vec2 }
    | { kind: 'drag-note'; id: string; grabOffset: Vec2; startWorld: Vec2; moved: boolean }
    | { kind: 'drag-group'; startWorld: Vec2; moved: boolean }
    | { kind: 'link-drag'; source: string }
    | { kind: 'clipboard-drag'; item: { id: string; text: string; kind: 'note' | 'label' } }
    | { kind: 'panel-icon-drag' }
    | { kind: 'panel-drag'; id: string; startWorld: Vec2; moved: boolean }
    | { kind: 'panel-resize'; id: string; original: RectV };

export class InteractionController {
    session: UiSession;
    view: ViewTransform;
    selection: Selection | null = null;
    noteColor = 0; // palette index used for newly created notes
    mode: Mode = { kind: 'idle' };
    cursorScreen: Vec2 = { x: 0, y: 0 };
    promptText: (initial: string) => string | null = () => null;
    onHoldingChange: (holding: string | null) => void = () => {};

    constructor(session: UiSession, view: ViewTransform) {
        this.session = session;
        this.view = view;
    }

    private replica() {
        return this.session.replica;
    }

    // -- hit testing ---------------------------------------------------------

    noteAt(world: Vec2): Note | null {
        const notes = [...this.replica().notes.values()];
        for (let i = notes.length - 1; i >= 0; i--) {
            if (rectContainsPoint(noteRect(notes[i].position), world)) return notes[i];
        }
        return null;
    }

    pinAt(screen: Vec2): Note | null {
        for (const note of this.replica().notes.values()) {
            const pin = this.view.project(pinAnchor(note.position));
            if (Math.hypot(screen.x - pin.x, screen.y - pin.y) <= PIN_RADIUS_PX) return note;
        }
        return null;
    }

    labelAt(world: Vec2): Label | null {
        for (const link of this.replica().links.values()) {
            for (const [labelId, pos] of this.labelPositions(link)) {
                const r: RectV = {
                    min: { x: pos.x - LABEL_W / 2, y: pos.y - LABEL_H / 2 },
                    max: { x: pos.x + LABEL_W / 2, y: pos.y + LABEL_H / 2 },
                };
                if (rectContainsPoint(r, world)) return this.replica().labels.get(labelId) ?? null;
            }
        }
        return null;
    }

    labelPositions(link: Link): Array<[string, Vec2]> {
        const a = pinAnchor(this.replica().notes.get(link.source)!.position);
        const b = pinAnchor(this.replica().notes.get(link.target)!.position);
        return labelLayout(a, b, link.labels);
    }

    linkAt(world: Vec2): Link | null {
        let best: Link | null = null;
        let bestDist = LINK_HIT_PX / this.view.zoom;
        for (const link of this.replica().links.values()) {
            const a = pinAnchor(this.replica().notes.get(link.source)!.position);
            const b = pinAnchor(this.replica().notes.get(link.target)!.position);
            const d = segmentDistance(world, a, b);
            if (d <= bestDist) {
                best = link;
                bestDist = d;
            }
        }
        return best;
    }

    panelAt(world: Vec2): Panel | null {
        const panels = [...this.replica().panels.values()];
        for (let i = panels.length - 1; i >= 0; i--) {
            if (rectContainsPoint(panels[i].bounds, world)) return panels[i];
        }
        return null;
    }

    resizeHandleAt(screen: Vec2): Panel | null {
        for (const panel of this.replica().panels.values()) {
            const corner = this.view.project(panel.bounds.max);
            if (Math.abs(screen.x - corner.x) <= RESIZE_HANDLE_PX && Math.abs(screen.y - corner.y) <= RESIZE_HANDLE_PX) {
                return panel;
            }
        }
        return null;
    }

    // -- screen-space widgets --------------------------------------------------

    clipboardItemRect(index: number): ScreenRect {
        // Slot 0 is the panel icon; items follow.
        const y = CLIPBOARD_Y + index * (CLIPBOARD_ITEM_H + CLIPBOARD_GAP);
        return { x: CLIPBOARD_X, y, w: CLIPBOARD_ITEM_W, h: CLIPBOARD_ITEM_H };
    }

    clipboardHit(screen: Vec2): { panelIcon: boolean; item?: { id: string; text: string; kind: 'note' | 'label' } } | null {
        const items = this.replica().clipboard;
        for (let slot = 0; slot <= items.length; slot++) {
            const r = this.clipboardItemRect(slot);
            if (screen.x >= r.x && screen.x <= r.x + r.w && screen.y >= r.y && screen.y <= r.y + r.h) {
                if (slot === 0) return { panelIcon: true };
                return { panelIcon: false, item: items[slot - 1] };
            }
        }
        return null;
    }

    buttonRects(): Record<string, ScreenRect> {
        const out: Record<string, ScreenRect> = {};
        if (!this.selection) return out;
        const world = this.selectionAnchor();
        if (!world) return out;
        const screen = this.view.project(world);
        const y = screen.y - 34;
        if (this.selection.kind === 'note') {
            out.delete = { x: screen.x, y, w: 64, h: 24 };
            for (let i = 0; i < NOTE_PALETTE.length; i++) {
                out[`color${i}`] = { x: screen.x + 70 + i * 20, y: y + 4, w: 16, h: 16 };
            }
        } else if (this.selection.kind === 'label') {
            out.delete = { x: screen.x, y, w: 64, h: 24 };
            out.flip = { x: screen.x + 70, y, w: 48, h: 24 };
        } else {
            out.delete = { x: screen.x, y, w: 64, h: 24 };
        }
        return out;
    }

    private selectionAnchor(): Vec2 | null {
        const state = this.replica();
        if (!this.selection) return null;
        if (this.selection.kind === 'note') {
            const note = state.notes.get(this.selection.id);
            return note ? noteRect(note.position).min : null;
        }
        if (this.selection.kind === 'label') {
            const label = state.labels.get(this.selection.id);
            if (!label) return null;
            const link = state.links.get(label.link);
            if (!link) return null;
            for (const [labelId, pos] of this.labelPositions(link)) {
                if (labelId === label.id) return { x: pos.x - LABEL_W / 2, y: pos.y - LABEL_H / 2 };
            }
            return null;
        }
        const panel = state.panels.get(this.selection.id);
        return panel ? panel.bounds.min : null;
    }

    private buttonHit(screen: Vec2): string | null {
        for (const [name, r] of Object.entries(this.buttonRects())) {
            if (screen.x >= r.x && screen.x <= r.x + r.w && screen.y >= r.y && screen.y <= r.y + r.h) return name;
        }
        return null;
    }

    // -- pointer events ---------------------------------------------------------

    pointerDown(screen: Vec2, opts: { shift?: boolean } = {}): void {
        this.cursorScreen = screen;
        const state = this.replica();

        const button = this.buttonHit(screen);
        if (button && this.selection) {
            this.activateButton(button);
            return;
        }

        const clip = this.clipboardHit(screen);
        if (clip) {
            this.mode = clip.panelIcon
                ? { kind: 'panel-icon-drag' }
                : { kind: 'clipboard-drag', item: clip.item! };
            return;
        }

        const world = this.view.unproject(screen);

        const pinNote = this.pinAt(screen);
        if (pinNote) {
            this.mode = { kind: 'link-drag', source: pinNote.id };
            return;
        }

        const label = this.labelAt(world);
        if (label) {
            this.selection = { kind: 'label', id: label.id };
            this.mode = { kind: 'idle' };
            return;
        }

        const note = this.noteAt(world);
        if (note) {
            if (opts.shift) {
                this.toggleGroupMembership(note.id);
                return;
            }
            this.selection = { kind: 'note', id: note.id };
            const group = this.session.userId ? state.groups.get(this.session.userId) : undefined;
            if (group && group.members.has(note.id)) {
                this.mode = { kind: 'drag-group', startWorld: world, moved: false };
            } else {
                this.mode = {
                    kind: 'drag-note',
                    id: note.id,
                    grabOffset: { x: world.x - note.position.x, y: world.y - note.position.y },
                    startWorld: world,
                    moved: false,
                };
                this.onHoldingChange(note.id);
            }
            return;
        }

        const handle = this.resizeHandleAt(screen);
        if (handle) {
            this.selection = { kind: 'panel', id: handle.id };
            this.mode = { kind: 'panel-resize', id: handle.id, original: handle.bounds };
            return;
        }

        const panel = this.panelAt(world);
        if (panel) {
            this.selection = { kind: 'panel', id: panel.id };
            this.mode = { kind: 'panel-drag', id: panel.id, startWorld: world, moved: false };
            return;
        }

        this.selection = null;
        this.mode = { kind: 'pan', lastScreen: screen };
    }

    pointerMove(screen: Vec2): void {
        const previous = this.cursorScreen;
        this.cursorScreen = screen;
        const mode = this.mode;
        if (mode.kind === 'pan') {
            this.view.panBy({ x: screen.x - mode.lastScreen.x, y: screen.y - mode.lastScreen.y });
            mode.lastScreen = screen;
            return;
        }
        if (mode.kind === 'drag-note' || mode.kind === 'drag-group' || mode.kind === 'panel-drag') {
            if (Math.hypot(screen.x - previous.x, screen.y - previous.y) > 0) {
                const start = this.view.project(mode.startWorld);
                if (Math.hypot(screen.x - start.x, screen.y - start.y) > DRAG_THRESHOLD_PX) mode.moved = true;
            }
        }
    }

    pointerUp(screen: Vec2, opts: { shift?: boolean } = {}): void {
        this.cursorScreen = screen;
        const mode = this.mode;
        this.mode = { kind: 'idle' };
        const world = this.view.unproject(screen);
        const state = this.replica();

        switch (mode.kind) {
            case 'drag-note': {
                this.onHoldingChange(null);
                if (!mode.moved) return;
                const note = state.notes.get(mode.id);
                if (!note) return;
                const position = vec(world.x - mode.grabOffset.x, world.y - mode.grabOffset.y);
                this.session.submit({ kind: 'move_note', note: mode.id, position });
                const snapped = panelSnap(state, position);
                if (snapped !== null && snapped !== note.panel) {
                    this.session.submit({ kind: 'attach_note_to_panel', note: mode.id, panel: snapped });
                } else if (snapped === null && note.panel !== null) {
                    this.session.submit({ kind: 'detach_note_from_panel', note: mode.id });
                }
                return;
            }
            case 'drag-group': {
                if (!mode.moved) return;
                const delta = vec(world.x - mode.startWorld.x, world.y - mode.startWorld.y);
                this.session.submit({ kind: 'move_group', delta });
                return;
            }
            case 'link-drag': {
                const target = this.pinAt(screen) ?? this.noteAt(world);
                if (!target || target.id === mode.source) return;
                for (const link of state.links.values()) {
                    if ((link.source === mode.source && link.target === target.id)
                        || (link.source === target.id && link.target === mode.source)) {
                        this.session.notice('those notes are already linked');
                        return;
                    }
                }
                this.session.submit({ kind: 'create_link', source: mode.source, target: target.id });
                return;
            }
            case 'clipboard-drag': {
                if (this.clipboardHit(screen)) return; // dropped back on the strip
                if (mode.item.kind === 'label') {
                    const link = this.linkAt(world);
                    if (link) {
                        this.session.submit({
                            kind: 'attach_label', link: link.id, text: mode.item.text,
                            orientation: 'forward', from_clipboard: mode.item.id,
                        });
                    } else {
                        this.session.notice('drop labels onto a link');
                    }
                    return;
                }
                const position = vec(world.x, world.y);
                const op = this.session.submit({
                    kind: 'create_note', text: mode.item.text, color: this.noteColor,
                    position, from_clipboard: mode.item.id,
                });
                const snapped = panelSnap(state, position);
                if (snapped !== null) {
                    // The note id is derivable before the echo arrives.
                    const futureId = `note:${op.client_id}:${op.client_seq}`;
                    this.session.submit({ kind: 'attach_note_to_panel', note: futureId, panel: snapped });
                }
                return;
            }
            case 'panel-icon-drag': {
                if (this.clipboardHit(screen)) return;
                this.session.submit({
                    kind: 'create_panel',
                    bounds: {
                        min: vec(world.x - PANEL_DEFAULT_W / 2, world.y - PANEL_DEFAULT_H / 2),
                        max: vec(world.x + PANEL_DEFAULT_W / 2, world.y + PANEL_DEFAULT_H / 2),
                    },
                });
                return;
            }
            case 'panel-drag': {
                if (!mode.moved) return;
                const delta = vec(world.x - mode.startWorld.x, world.y - mode.startWorld.y);
                this.session.submit({ kind: 'move_panel', panel: mode.id, delta });
                return;
            }
            case 'panel-resize': {
                const panel = state.panels.get(mode.id);
                if (!panel) return;
                let maxX = Math.max(world.x, mode.original.min.x + PANEL_MIN_SIZE);
                let maxY = Math.max(world.y, mode.original.min.y + PANEL_MIN_SIZE);
                // Never resize below the attached notes' footprint.
                for (const nid of panel.attached) {
                    const r = noteRect(state.notes.get(nid)!.position);
                    maxX = Math.max(maxX, r.max.x);
                    maxY = Math.max(maxY, r.max.y);
                }
                this.session.submit({
                    kind: 'resize_panel', panel: mode.id,
                    bounds: { min: vec(mode.original.min.x, mode.original.min.y), max: vec(maxX, maxY) },
                });
                return;
            }
            case 'pan':
            case 'idle':
                return;
        }
    }

    doubleClick(screen: Vec2): void {
        if (!this.session.config.freeTextNotes) return;
        const world = this.view.unproject(screen);
        if (this.noteAt(world) || this.labelAt(world) || this.clipboardHit(screen)) return;
        const text = this.promptText('');
        if (text === null) return;
        this.session.submit({ kind: 'create_note', text, color: this.noteColor, position: vec(world.x, world.y), from_clipboard: null });
    }

    wheel(screen: Vec2, deltaY: number): void {
        const factor = Math.pow(1.0015, -deltaY);
        this.view.zoomAt(screen, factor);
    }

    deleteSelection(): void {
        if (!this.selection) return;
        const { kind, id } = this.selection;
        if (kind === 'note') this.session.submit({ kind: 'delete_note', note: id });
        else if (kind === 'label') this.session.submit({ kind: 'detach_label', label: id });
        else this.session.submit({ kind: 'delete_panel', panel: id });
        this.selection = null;
    }

    private activateButton(name: string): void {
        if (!this.selection) return;
        const { kind, id } = this.selection;
        if (name === 'delete') {
            this.deleteSelection();
            return;
        }
        if (name === 'flip' && kind === 'label') {
            this.session.submit({ kind: 'flip_label', label: id });
            return;
        }
        const colorMatch = /^color(\d+)$/.exec(name);
        if (colorMatch && kind === 'note') {
            const color = Number(colorMatch[1]);
            this.noteColor = color;
            this.session.submit({ kind: 'set_note_color', note: id, color });
        }
    }

    private toggleGroupMembership(noteId: string): void {
        const userId = this.session.userId;
        if (!userId) return;
        const group = this.replica().groups.get(userId);
        const members = new Set(group ? group.members : []);
        if (members.has(noteId)) members.delete(noteId);
        else members.add(noteId);
        if (members.size === 0) this.session.submit({ kind: 'clear_group' });
        else this.session.submit({ kind: 'set_group', members: [...members].sort() });
    }

    // What a drag currently looks like, for ghost rendering and clone lines.
    dragGhost(): { kind: 'note' | 'label' | 'panel'; text?: string; world: Vec2 } | null {
        const world = this.view.unproject(this.cursorScreen);
        const mode = this.mode;
        if (mode.kind === 'clipboard-drag') {
            return { kind: mode.item.kind === 'note' ? 'note' : 'label', text: mode.item.text, world };
        }
        if (mode.kind === 'panel-icon-drag') return { kind: 'panel', world };
        return null;
    }

    heldNote(): string | null {
        return this.mode.kind === 'drag-note' ? this.mode.id : null;
    }

    dragNotePosition(): Vec2 | null {
        if (this.mode.kind !== 'drag-note') return null;
        const world = this.view.unproject(this.cursorScreen);
        return { x: world.x - this.mode.grabOffset.x, y: world.y - this.mode.grabOffset.y };
    }
}

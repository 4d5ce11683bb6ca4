// Canvas renderer: workspace, previews, awareness overlays, dashboard.

import {
    AVATAR_PALETTE, NOTE_PALETTE, NOTE_WIDTH, Vec2,
    noteRect, pinAnchor, vec,
} from './geometry.js';
import {
    CLONE_PULSE_SECONDS, cloneTargets, minimapProject, normalizeText, worldBounds,
} from './awareness.js';
import { dashboardModel } from './dashboard.js';
import { CLIPBOARD_ITEM_H, CLIPBOARD_ITEM_W, CLIPBOARD_GAP, CLIPBOARD_X, CLIPBOARD_Y, InteractionController } from './controller.js';
import { Link } from './model.js';
import { UiSession } from './session.js';
import { ViewTransform } from './view.js';

const MINIMAP_W = 200;
const MINIMAP_H = 150;
const DASH_H = 88;

export class Renderer {
    canvas: HTMLCanvasElement;
    ctx: CanvasRenderingContext2D;
    session: UiSession;
    view: ViewTransform;
    controller: InteractionController;

    constructor(canvas: HTMLCanvasElement, session: UiSession, view: ViewTransform, controller: InteractionController) {
        this.canvas = canvas;
        this.ctx = canvas.getContext('2d')!;
        this.session = session;
        this.view = view;
        this.controller = controller;
    }

    draw(nowMs: number): void {
        const ctx = this.ctx;
        const w = this.canvas.width, h = this.canvas.height;
        ctx.clearRect(0, 0, w, h);
        ctx.fillStyle = '#fafaf7';
        ctx.fillRect(0, 0, w, h);

        this.drawPanels();
        this.drawLinksAndLabels();
        this.drawNotes();
        this.drawGroups();
        this.drawCloneIndicators(nowMs);
        this.drawDragGhost();
        this.drawRemoteCursors();
        this.drawSelectionButtons();
        this.drawClipboard();
        this.drawDashboard();
        this.drawMinimap(w, h);
        this.drawNotices(w);
    }

    private project(p: Vec2): Vec2 {
        return this.view.project(p);
    }

    private drawPanels(): void {
        const ctx = this.ctx;
        for (const panel of this.session.replica.panels.values()) {
            const a = this.project(panel.bounds.min);
            const b = this.project(panel.bounds.max);
            ctx.fillStyle = 'rgba(200, 205, 210, 0.35)';
            ctx.strokeStyle = '#9aa3ab';
            ctx.lineWidth = 1.5;
            ctx.fillRect(a.x, a.y, b.x - a.x, b.y - a.y);
            ctx.strokeRect(a.x, a.y, b.x - a.x, b.y - a.y);
            // resize handle
            ctx.fillStyle = '#9aa3ab';
            ctx.fillRect(b.x - 6, b.y - 6, 6, 6);
        }
    }

    private linkEndpoints(link: Link): [Vec2, Vec2] {
        const notes = this.session.replica.notes;
        return [pinAnchor(notes.get(link.source)!.position), pinAnchor(notes.get(link.target)!.position)];
    }

    private drawLinksAndLabels(): void {
        const ctx = this.ctx;
        const zoom = this.view.zoom;
        for (const link of this.session.replica.links.values()) {
            const [wa, wb] = this.linkEndpoints(link);
            const a = this.project(wa), b = this.project(wb);
            ctx.strokeStyle = '#555';
            ctx.lineWidth = Math.max(1, 2 * zoom);
            ctx.beginPath();
            ctx.moveTo(a.x, a.y);
            ctx.lineTo(b.x, b.y);
            ctx.stroke();
            for (const [labelId, posWorld] of this.controller.labelPositions(link)) {
                const label = this.session.replica.labels.get(labelId);
                if (!label) continue;
                const pos = this.project(posWorld);
                const lw = 72 * zoom, lh = 20 * zoom;
                ctx.fillStyle = '#fffdf2';
                ctx.strokeStyle = '#777';
                ctx.lineWidth = 1;
                ctx.fillRect(pos.x - lw / 2, pos.y - lh / 2, lw, lh);
                ctx.strokeRect(pos.x - lw / 2, pos.y - lh / 2, lw, lh);
                ctx.fillStyle = '#333';
                ctx.font = `${Math.max(8, 11 * zoom)}px sans-serif`;
                ctx.textAlign = 'center';
                ctx.textBaseline = 'middle';
                const arrow = label.orientation === 'forward' ? '→' : '←';
                ctx.fillText(`${arrow} ${label.text}`.slice(0, 18), pos.x, pos.y, lw - 4);
            }
        }
    }

    private drawNotes(): void {
        const ctx = this.ctx;
        const zoom = this.view.zoom;
        const held = this.controller.heldNote();
        for (const note of this.session.replica.notes.values()) {
            let position = note.position;
            if (held === note.id) {
                position = this.controller.dragNotePosition() ?? position;
            } else {
                const preview = this.session.previewPosition(note.id);
                if (preview) position = preview;
            }
            const r = noteRect(position);
            const a = this.project(r.min);
            const size = NOTE_WIDTH * zoom;
            ctx.fillStyle = NOTE_PALETTE[note.color % NOTE_PALETTE.length];
            ctx.strokeStyle = '#00000022';
            ctx.fillRect(a.x, a.y, size, size);
            ctx.strokeRect(a.x, a.y, size, size);
            // pin
            const pin = this.project(pinAnchor(position));
            ctx.fillStyle = '#c33';
            ctx.beginPath();
            ctx.arc(pin.x, pin.y, Math.max(3, 5 * zoom), 0, Math.PI * 2);
            ctx.fill();
            // text
            ctx.fillStyle = '#222';
            ctx.font = `${Math.max(8, 13 * zoom)}px sans-serif`;
            ctx.textAlign = 'center';
            ctx.textBaseline = 'middle';
            this.wrapText(note.text, a.x + size / 2, a.y + size / 2, size - 10 * zoom, 15 * zoom);
        }
    }

    private wrapText(text: string, cx: number, cy: number, maxWidth: number, lineHeight: number): void {
        const words = text.split(/\s+/).filter((w) => w);
        const lines: string[] = [];
        let line = '';
        for (const word of words) {
            const probe = line ? `${line} ${word}` : word;
            if (this.ctx.measureText(probe).width > maxWidth && line) {
                lines.push(line);
                line = word;
            } else {
                line = probe;
            }
        }
        if (line) lines.push(line);
        const shown = lines.slice(0, 5);
        const y0 = cy - ((shown.length - 1) / 2) * lineHeight;
        shown.forEach((l, i) => this.ctx.fillText(l, cx, y0 + i * lineHeight, maxWidth));
    }

    private drawGroups(): void {
        const ctx = this.ctx;
        const replica = this.session.replica;
        const colors = this.session.userColors();
        for (const group of replica.groups.values()) {
            const color = AVATAR_PALETTE[(colors.get(group.owner) ?? 0) % AVATAR_PALETTE.length];
            ctx.strokeStyle = color;
            ctx.setLineDash([6, 4]);
            ctx.lineWidth = 2;
            for (const member of group.members) {
                const note = replica.notes.get(member);
                if (!note) continue;
                const r = noteRect(note.position);
                const a = this.project(r.min), b = this.project(r.max);
                ctx.strokeRect(a.x - 3, a.y - 3, b.x - a.x + 6, b.y - a.y + 6);
            }
            ctx.setLineDash([]);
        }
    }

    private drawCloneIndicators(nowMs: number): void {
        const replica = this.session.replica;
        const held = this.controller.heldNote();
        const ghost = this.controller.dragGhost();
        let sourceWorld: Vec2 | null = null;
        let matchText = '';
        if (held && replica.notes.has(held)) {
            sourceWorld = this.controller.dragNotePosition() ?? replica.notes.get(held)!.position;
            matchText = replica.notes.get(held)!.text;
        } else if (ghost && ghost.kind === 'note' && ghost.text) {
            sourceWorld = ghost.world;
            matchText = ghost.text;
        }
        if (!sourceWorld) return;
        const wanted = normalizeText(matchText);
        if (!wanted) return;
        const pulse = 0.35 + 0.65 * (0.5 + 0.5 * Math.sin((nowMs / 1000 / CLONE_PULSE_SECONDS) * Math.PI * 2));
        const targets = held
            ? cloneTargets(replica, held, true).targets
            : [...replica.notes.values()].filter((n) => normalizeText(n.text) === wanted).map((n) => n.id);
        for (const targetId of targets) {
            const target = replica.notes.get(targetId);
            if (!target) continue;
            this.drawTaperedLink(sourceWorld, target.position, pulse);
        }
    }

    // Red tapered indicator: wide at the held note, narrow at the clone.
    private drawTaperedLink(fromWorld: Vec2, toWorld: Vec2, alpha: number): void {
        const ctx = this.ctx;
        const a = this.project(fromWorld);
        const b = this.project(toWorld);
        const dx = b.x - a.x, dy = b.y - a.y;
        const len = Math.hypot(dx, dy);
        if (len < 1) return;
        const nx = -dy / len, ny = dx / len;
        const wide = Math.max(4, 10 * this.view.zoom);
        ctx.fillStyle = `rgba(214, 50, 50, ${alpha.toFixed(3)})`;
        ctx.beginPath();
        ctx.moveTo(a.x + nx * wide, a.y + ny * wide);
        ctx.lineTo(a.x - nx * wide, a.y - ny * wide);
        ctx.lineTo(b.x, b.y);
        ctx.closePath();
        ctx.fill();
    }

    private drawDragGhost(): void {
        const ghost = this.controller.dragGhost();
        if (!ghost) return;
        const ctx = this.ctx;
        const p = this.project(ghost.world);
        ctx.globalAlpha = 0.55;
        if (ghost.kind === 'note') {
            const size = NOTE_WIDTH * this.view.zoom;
            ctx.fillStyle = NOTE_PALETTE[this.controller.noteColor % NOTE_PALETTE.length];
            ctx.fillRect(p.x - size / 2, p.y - size / 2, size, size);
        } else if (ghost.kind === 'label') {
            ctx.fillStyle = '#fffdf2';
            ctx.strokeStyle = '#777';
            ctx.fillRect(p.x - 36, p.y - 10, 72, 20);
            ctx.strokeRect(p.x - 36, p.y - 10, 72, 20);
        } else {
            ctx.fillStyle = 'rgba(200, 205, 210, 0.5)';
            ctx.fillRect(p.x - 90, p.y - 70, 180, 140);
        }
        ctx.globalAlpha = 1;
    }

    private drawRemoteCursors(): void {
        const ctx = this.ctx;
        for (const p of this.session.roster) {
            if (p.user === this.session.userId) continue;
            const s = this.project(p.cursor);
            const color = AVATAR_PALETTE[p.color % AVATAR_PALETTE.length];
            ctx.fillStyle = color;
            ctx.beginPath();
            ctx.moveTo(s.x, s.y);
            ctx.lineTo(s.x + 10, s.y + 14);
            ctx.lineTo(s.x + 4, s.y + 13);
            ctx.closePath();
            ctx.fill();
            ctx.font = '12px sans-serif';
            ctx.textAlign = 'left';
            ctx.textBaseline = 'top';
            const tag = p.name + (p.speaking ? ' 🗣' : '') + (this.session.badgeHolder === p.user ? ' ⭐' : '');
            ctx.fillText(tag, s.x + 12, s.y + 14);
        }
    }

    private drawSelectionButtons(): void {
        const ctx = this.ctx;
        const rects = this.controller.buttonRects();
        for (const [name, r] of Object.entries(rects)) {
            const colorMatch = /^color(\d+)$/.exec(name);
            if (colorMatch) {
                ctx.fillStyle = NOTE_PALETTE[Number(colorMatch[1])];
                ctx.fillRect(r.x, r.y, r.w, r.h);
                ctx.strokeStyle = '#555';
                ctx.strokeRect(r.x, r.y, r.w, r.h);
                continue;
            }
            ctx.fillStyle = '#333';
            ctx.fillRect(r.x, r.y, r.w, r.h);
            ctx.fillStyle = '#fff';
            ctx.font = '12px sans-serif';
            ctx.textAlign = 'center';
            ctx.textBaseline = 'middle';
            ctx.fillText(name === 'flip' ? 'FLIP' : 'DELETE', r.x + r.w / 2, r.y + r.h / 2);
        }
    }

    private drawClipboard(): void {
        const ctx = this.ctx;
        const items = this.session.replica.clipboard;
        ctx.font = '12px sans-serif';
        ctx.textAlign = 'left';
        ctx.textBaseline = 'middle';
        for (let slot = 0; slot <= items.length; slot++) {
            const y = CLIPBOARD_Y + slot * (CLIPBOARD_ITEM_H + CLIPBOARD_GAP);
            ctx.fillStyle = slot === 0 ? '#d7dde3' : items[slot - 1].kind === 'note' ? '#f5eec8' : '#e8e3f5';
            ctx.strokeStyle = '#999';
            ctx.fillRect(CLIPBOARD_X, y, CLIPBOARD_ITEM_W, CLIPBOARD_ITEM_H);
            ctx.strokeRect(CLIPBOARD_X, y, CLIPBOARD_ITEM_W, CLIPBOARD_ITEM_H);
            ctx.fillStyle = '#333';
            const text = slot === 0 ? '▦ new panel' : items[slot - 1].text;
            ctx.fillText(text.slice(0, 20), CLIPBOARD_X + 6, y + CLIPBOARD_ITEM_H / 2);
        }
    }

    private drawDashboard(): void {
        const ctx = this.ctx;
        const w = this.canvas.width;
        ctx.fillStyle = 'rgba(250, 250, 247, 0.95)';
        ctx.fillRect(0, 0, w, DASH_H);
        ctx.strokeStyle = '#ddd';
        ctx.beginPath();
        ctx.moveTo(0, DASH_H);
        ctx.lineTo(w, DASH_H);
        ctx.stroke();
        const scoreboard = this.session.scoreboard;
        if (!scoreboard) return;
        const names = this.session.userNames();
        const groups = dashboardModel(scoreboard, this.session.userColors());
        const groupWidth = Math.min(260, (w - 20) / Math.max(1, groups.length));
        const barMax = groupWidth - 120;
        groups.forEach((group, gi) => {
            const x0 = 10 + gi * groupWidth;
            ctx.fillStyle = '#444';
            ctx.font = 'bold 11px sans-serif';
            ctx.textAlign = 'left';
            ctx.textBaseline = 'top';
            ctx.fillText(group.measure, x0, 4);
            group.bars.slice(0, 4).forEach((bar, bi) => {
                const y = 20 + bi * 16;
                ctx.fillStyle = AVATAR_PALETTE[bar.color % AVATAR_PALETTE.length];
                ctx.fillRect(x0 + 80, y, Math.max(1, bar.length * barMax), 10);
                ctx.fillStyle = '#333';
                ctx.font = '10px sans-serif';
                const name = names.get(bar.user) ?? bar.user;
                const badge = this.session.badgeHolder === bar.user ? ' ⭐' : '';
                ctx.fillText((name + badge).slice(0, 12), x0, y);
            });
        });
    }

    private drawMinimap(w: number, h: number): void {
        const ctx = this.ctx;
        const x0 = w - MINIMAP_W - 12, y0 = h - MINIMAP_H - 12;
        ctx.fillStyle = 'rgba(255, 255, 255, 0.92)';
        ctx.strokeStyle = '#888';
        ctx.fillRect(x0, y0, MINIMAP_W, MINIMAP_H);
        ctx.strokeRect(x0, y0, MINIMAP_W, MINIMAP_H);

        const replica = this.session.replica;
        const world = worldBounds(replica);
        const presence = this.session.roster.map((p) => ({
            user: p.user, name: p.name, color: p.color, cursor: p.cursor,
            viewport: p.viewport, holding: p.holding, speaking: p.speaking,
        }));
        // Include our own live viewport even before the next presence echo.
        const own = presence.find((p) => p.user === this.session.userId);
        const visible = this.view.visibleWorldRect(w, h);
        if (own) own.viewport = visible;
        else if (this.session.userId) {
            presence.push({
                user: this.session.userId, name: 'me', color: this.session.color,
                cursor: vec(0, 0), viewport: visible, holding: null, speaking: false,
            });
        }
        const model = minimapProject(replica, presence, world, { x: MINIMAP_W, y: MINIMAP_H });
        for (const item of model.items) {
            const color = AVATAR_PALETTE[item.color % AVATAR_PALETTE.length];
            if (item.kind === 'note') {
                const [a, b] = item.points;
                ctx.fillStyle = color;
                ctx.fillRect(x0 + a.x, y0 + a.y, Math.max(2, b.x - a.x), Math.max(2, b.y - a.y));
            } else if (item.kind === 'link') {
                const [a, b] = item.points;
                ctx.strokeStyle = color;
                ctx.lineWidth = 1;
                ctx.beginPath();
                ctx.moveTo(x0 + a.x, y0 + a.y);
                ctx.lineTo(x0 + b.x, y0 + b.y);
                ctx.stroke();
            } else if (item.kind === 'label') {
                const [p] = item.points;
                ctx.fillStyle = color;
                ctx.fillRect(x0 + p.x - 1.5, y0 + p.y - 1.5, 3, 3);
            } else {
                const [a, b] = item.points;
                ctx.strokeStyle = color;
                ctx.strokeRect(x0 + a.x, y0 + a.y, b.x - a.x, b.y - a.y);
            }
        }
        for (const vp of model.viewports) {
            ctx.strokeStyle = AVATAR_PALETTE[vp.color % AVATAR_PALETTE.length];
            ctx.lineWidth = vp.user === this.session.userId ? 2 : 1;
            ctx.strokeRect(x0 + vp.min.x, y0 + vp.min.y, vp.max.x - vp.min.x, vp.max.y - vp.min.y);
        }
    }

    private drawNotices(w: number): void {
        const ctx = this.ctx;
        const notices = this.session.activeNotices();
        notices.slice(-3).forEach((n, i) => {
            ctx.fillStyle = 'rgba(40, 40, 40, 0.85)';
            const y = DASH_H + 12 + i * 30;
            const width = ctx.measureText(n.text).width + 24;
            ctx.fillRect(w / 2 - width / 2, y, width, 24);
            ctx.fillStyle = '#fff';
            ctx.font = '12px sans-serif';
            ctx.textAlign = 'center';
            ctx.textBaseline = 'middle';
            ctx.fillText(n.text, w / 2, y + 12);
        });
    }
}

// Scripted interaction tests: synthetic pointer sequences must emit
// exactly the specified operations (release criterion for UI fidelity).

import { beforeEach, describe, expect, it } from 'vitest';
import { InteractionController } from '../src/controller.js';
import { UiSession } from '../src/session.js';
import { ViewTransform } from '../src/view.js';
import { ClientMessage, SubmitOpMsg, WelcomeMsg } from '../src/protocol.js';
import { Payload } from '../src/model.js';

const EMPTY_SNAPSHOT = {
    applied_seq: 0, notes: {}, links: {}, labels: {}, panels: {}, groups: {}, clipboard: [],
};

const CLIPBOARD = [
    { id: 'clip:0', text: 'water cycle', kind: 'note' as const },
    { id: 'clip:1', text: 'causes', kind: 'label' as const },
];

function welcome(): WelcomeMsg {
    return {
        type: 'welcome', your_user_id: 'u1', assigned_color: 0,
        snapshot: structuredClone(EMPTY_SNAPSHOT), resume_from_seq: null,
        clipboard: CLIPBOARD,
        scoreboard: { session_start: 0, badge_holder: null, users: {} },
    };
}

interface Rig {
    session: UiSession;
    controller: InteractionController;
    view: ViewTransform;
    sent: ClientMessage[];
    submitted: () => Payload[];
    serverApply: (payload: Payload, actor?: string) => string;
    echoPending: () => void;
}

let serverCounters: Map<string, number>;

function makeRig(): Rig {
    const session = new UiSession({ freeTextNotes: true, clonesOnTextEdit: false });
    const sent: ClientMessage[] = [];
    session.sendMessage = (msg) => sent.push(msg);
    session.handleServer(welcome());
    const view = new ViewTransform(); // zoom 1, pan 0: screen == world
    const controller = new InteractionController(session, view);
    serverCounters = new Map();

    const serverApply = (payload: Payload, actor = 'u9'): string => {
        const seq = (serverCounters.get(actor) ?? 0) + 1;
        serverCounters.set(actor, seq);
        session.handleServer({
            type: 'op_broadcast',
            op: {
                client_id: actor, client_seq: seq, actor, wall_clock_ms: 0,
                server_seq: session.replica.appliedSeq + 1, payload,
            },
        });
        return `${payload.kind.startsWith('create_panel') ? 'panel' : payload.kind === 'create_link' ? 'link' : 'note'}:${actor}:${seq}`;
    };

    const echoPending = () => {
        // Echo our own submitted ops back, as the server would.
        for (const msg of [...sent]) {
            if ((msg as SubmitOpMsg).type !== 'submit_op') continue;
            const op = (msg as SubmitOpMsg).op;
            if ((op.server_seq ?? null) !== null) continue;
            session.handleServer({
                type: 'op_broadcast',
                op: { ...op, server_seq: session.replica.appliedSeq + 1 },
            });
            op.server_seq = session.replica.appliedSeq;
        }
    };

    return {
        session, controller, view, sent,
        submitted: () => sent.filter((m): m is SubmitOpMsg => m.type === 'submit_op').map((m) => m.op.payload),
        serverApply, echoPending,
    };
}

function drag(rig: Rig, from: { x: number; y: number }, to: { x: number; y: number }, opts: { shift?: boolean } = {}) {
    rig.controller.pointerDown(from, opts);
    rig.controller.pointerMove({ x: (from.x + to.x) / 2, y: (from.y + to.y) / 2 });
    rig.controller.pointerMove(to);
    rig.controller.pointerUp(to, opts);
}

describe('clipboard interactions', () => {
    it('dragging a note snippet onto the canvas emits exactly one create_note', () => {
        const rig = makeRig();
        const slot = rig.controller.clipboardItemRect(1); // slot 0 is the panel icon
        drag(rig, { x: slot.x + 5, y: slot.y + 5 }, { x: 300, y: 200 });
        expect(rig.submitted()).toEqual([{
            kind: 'create_note', text: 'water cycle', color: 0,
            position: { x: 300, y: 200 }, from_clipboard: 'clip:0',
        }]);
    });

    it('dragging a label snippet onto a link emits attach_label', () => {
        const rig = makeRig();
        const a = rig.serverApply({ kind: 'create_note', text: 'a', color: 0, position: { x: 0, y: 260 }, from_clipboard: null });
        const b = rig.serverApply({ kind: 'create_note', text: 'b', color: 0, position: { x: 400, y: 260 }, from_clipboard: null });
        const link = rig.serverApply({ kind: 'create_link', source: a, target: b });
        const slot = rig.controller.clipboardItemRect(2);
        // The link runs pin to pin: between (0,200) and (400,200).
        drag(rig, { x: slot.x + 5, y: slot.y + 5 }, { x: 200, y: 200 });
        expect(rig.submitted()).toEqual([{
            kind: 'attach_label', link, text: 'causes', orientation: 'forward', from_clipboard: 'clip:1',
        }]);
    });

    it('dropping a label snippet on empty canvas emits nothing', () => {
        const rig = makeRig();
        const slot = rig.controller.clipboardItemRect(2);
        drag(rig, { x: slot.x + 5, y: slot.y + 5 }, { x: 500, y: 500 });
        expect(rig.submitted()).toEqual([]);
    });

    it('dropping a note snippet onto a panel also attaches the future note', () => {
        const rig = makeRig();
        const panel = rig.serverApply({ kind: 'create_panel', bounds: { min: { x: 600, y: 600 }, max: { x: 900, y: 860 } } });
        const slot = rig.controller.clipboardItemRect(1);
        drag(rig, { x: slot.x + 5, y: slot.y + 5 }, { x: 700, y: 700 });
        const ops = rig.submitted();
        expect(ops[0]).toEqual({
            kind: 'create_note', text: 'water cycle', color: 0,
            position: { x: 700, y: 700 }, from_clipboard: 'clip:0',
        });
        // The id is derivable before the echo: kind:client:clientSeq.
        expect(ops[1]).toEqual({ kind: 'attach_note_to_panel', note: 'note:u1:1', panel });
        rig.echoPending();
        expect(rig.session.replica.panels.get(panel)!.attached).toEqual(['note:u1:1']);
    });

    it('dragging the panel icon creates a panel at the drop point', () => {
        const rig = makeRig();
        const slot = rig.controller.clipboardItemRect(0);
        drag(rig, { x: slot.x + 5, y: slot.y + 5 }, { x: 500, y: 400 });
        expect(rig.submitted()).toEqual([{
            kind: 'create_panel',
            bounds: { min: { x: 500 - 180, y: 400 - 140 }, max: { x: 500 + 180, y: 400 + 140 } },
        }]);
    });
});

describe('linking', () => {
    it('dragging pin to pin emits create_link', () => {
        const rig = makeRig();
        const a = rig.serverApply({ kind: 'create_note', text: 'a', color: 0, position: { x: 0, y: 300 }, from_clipboard: null });
        const b = rig.serverApply({ kind: 'create_note', text: 'b', color: 0, position: { x: 400, y: 300 }, from_clipboard: null });
        drag(rig, { x: 0, y: 240 }, { x: 400, y: 240 }); // pins at note top centre
        expect(rig.submitted()).toEqual([{ kind: 'create_link', source: a, target: b }]);
    });

    it('suppresses a duplicate link locally', () => {
        const rig = makeRig();
        const a = rig.serverApply({ kind: 'create_note', text: 'a', color: 0, position: { x: 0, y: 300 }, from_clipboard: null });
        const b = rig.serverApply({ kind: 'create_note', text: 'b', color: 0, position: { x: 400, y: 300 }, from_clipboard: null });
        rig.serverApply({ kind: 'create_link', source: a, target: b });
        drag(rig, { x: 400, y: 240 }, { x: 0, y: 240 });
        expect(rig.submitted()).toEqual([]);
    });
});

describe('label buttons', () => {
    function withLabel(rig: Rig) {
        const a = rig.serverApply({ kind: 'create_note', text: 'a', color: 0, position: { x: 0, y: 360 }, from_clipboard: null });
        const b = rig.serverApply({ kind: 'create_note', text: 'b', color: 0, position: { x: 400, y: 360 }, from_clipboard: null });
        const link = rig.serverApply({ kind: 'create_link', source: a, target: b });
        rig.serverApply({ kind: 'attach_label', link, text: 'causes', orientation: 'forward', from_clipboard: null }, 'u9');
        const labelId = [...rig.session.replica.labels.keys()][0];
        return { labelId, mid: { x: 200, y: 300 } }; // pins at y=300
    }

    it('FLIP button emits flip_label', () => {
        const rig = makeRig();
        const { labelId, mid } = withLabel(rig);
        rig.controller.pointerDown(mid);
        rig.controller.pointerUp(mid);
        expect(rig.controller.selection).toEqual({ kind: 'label', id: labelId });
        const flip = rig.controller.buttonRects().flip;
        rig.controller.pointerDown({ x: flip.x + flip.w / 2, y: flip.y + flip.h / 2 });
        expect(rig.submitted()).toEqual([{ kind: 'flip_label', label: labelId }]);
        // After the echo the arrow renders reversed.
        rig.echoPending();
        expect(rig.session.replica.labels.get(labelId)!.orientation).toBe('reverse');
    });

    it('DELETE button emits detach_label', () => {
        const rig = makeRig();
        const { labelId, mid } = withLabel(rig);
        rig.controller.pointerDown(mid);
        rig.controller.pointerUp(mid);
        const del = rig.controller.buttonRects().delete;
        rig.controller.pointerDown({ x: del.x + del.w / 2, y: del.y + del.h / 2 });
        expect(rig.submitted()).toEqual([{ kind: 'detach_label', label: labelId }]);
    });
});

describe('grouping', () => {
    it('shift-click toggles membership via set_group/clear_group', () => {
        const rig = makeRig();
        const a = rig.serverApply({ kind: 'create_note', text: 'a', color: 0, position: { x: 0, y: 300 }, from_clipboard: null });
        const b = rig.serverApply({ kind: 'create_note', text: 'b', color: 0, position: { x: 400, y: 300 }, from_clipboard: null });

        rig.controller.pointerDown({ x: 0, y: 300 }, { shift: true });
        rig.echoPending();
        rig.controller.pointerDown({ x: 400, y: 300 }, { shift: true });
        rig.echoPending();
        rig.controller.pointerDown({ x: 0, y: 300 }, { shift: true });
        rig.echoPending();
        rig.controller.pointerDown({ x: 400, y: 300 }, { shift: true });
        rig.echoPending();

        const members = [a, b].sort();
        expect(rig.submitted()).toEqual([
            { kind: 'set_group', members: [a] },
            { kind: 'set_group', members },
            { kind: 'set_group', members: [b] },
            { kind: 'clear_group' },
        ]);
    });

    it('dragging a grouped note emits one move_group with the drag delta', () => {
        const rig = makeRig();
        rig.serverApply({ kind: 'create_note', text: 'a', color: 0, position: { x: 0, y: 300 }, from_clipboard: null });
        const noteId = [...rig.session.replica.notes.keys()][0];
        // The group belongs to this session's user.
        rig.serverApply({ kind: 'set_group', members: [noteId] }, 'u1');
        drag(rig, { x: 0, y: 300 }, { x: 150, y: 340 });
        expect(rig.submitted()).toEqual([{ kind: 'move_group', delta: { x: 150, y: 40 } }]);
    });
});

describe('note dragging and panel snap', () => {
    it('dropping a note near a panel emits move_note then attach_note_to_panel', () => {
        const rig = makeRig();
        const note = rig.serverApply({ kind: 'create_note', text: 'n', color: 0, position: { x: 0, y: 300 }, from_clipboard: null });
        const panel = rig.serverApply({ kind: 'create_panel', bounds: { min: { x: 600, y: 600 }, max: { x: 900, y: 860 } } });
        drag(rig, { x: 0, y: 300 }, { x: 700, y: 700 });
        expect(rig.submitted()).toEqual([
            { kind: 'move_note', note, position: { x: 700, y: 700 } },
            { kind: 'attach_note_to_panel', note, panel },
        ]);
    });

    it('dropping far from every panel emits only move_note', () => {
        const rig = makeRig();
        const note = rig.serverApply({ kind: 'create_note', text: 'n', color: 0, position: { x: 0, y: 300 }, from_clipboard: null });
        rig.serverApply({ kind: 'create_panel', bounds: { min: { x: 600, y: 600 }, max: { x: 900, y: 860 } } });
        drag(rig, { x: 0, y: 300 }, { x: -300, y: 200 });
        expect(rig.submitted()).toEqual([
            { kind: 'move_note', note, position: { x: -300, y: 200 } },
        ]);
    });

    it('dragging an attached note out emits move_note then detach', () => {
        const rig = makeRig();
        const note = rig.serverApply({ kind: 'create_note', text: 'n', color: 0, position: { x: 700, y: 700 }, from_clipboard: null });
        const panel = rig.serverApply({ kind: 'create_panel', bounds: { min: { x: 600, y: 600 }, max: { x: 900, y: 860 } } });
        rig.serverApply({ kind: 'attach_note_to_panel', note, panel });
        const pos = rig.session.replica.notes.get(note)!.position;
        drag(rig, { x: pos.x, y: pos.y }, { x: -500, y: -500 });
        expect(rig.submitted()).toEqual([
            { kind: 'move_note', note, position: { x: -500, y: -500 } },
            { kind: 'detach_note_from_panel', note },
        ]);
    });

    it('a plain click selects without emitting anything', () => {
        const rig = makeRig();
        const note = rig.serverApply({ kind: 'create_note', text: 'n', color: 0, position: { x: 0, y: 300 }, from_clipboard: null });
        rig.controller.pointerDown({ x: 0, y: 300 });
        rig.controller.pointerUp({ x: 0, y: 300 });
        expect(rig.controller.selection).toEqual({ kind: 'note', id: note });
        expect(rig.submitted()).toEqual([]);
    });

    it('note DELETE button emits delete_note', () => {
        const rig = makeRig();
        const note = rig.serverApply({ kind: 'create_note', text: 'n', color: 0, position: { x: 0, y: 300 }, from_clipboard: null });
        rig.controller.pointerDown({ x: 0, y: 300 });
        rig.controller.pointerUp({ x: 0, y: 300 });
        const del = rig.controller.buttonRects().delete;
        rig.controller.pointerDown({ x: del.x + del.w / 2, y: del.y + del.h / 2 });
        expect(rig.submitted()).toEqual([{ kind: 'delete_note', note }]);
    });
});

describe('free-text notes', () => {
    it('double-click on empty canvas prompts and creates', () => {
        const rig = makeRig();
        rig.controller.promptText = () => 'fresh idea';
        rig.controller.doubleClick({ x: 420, y: 330 });
        expect(rig.submitted()).toEqual([{
            kind: 'create_note', text: 'fresh idea', color: 0,
            position: { x: 420, y: 330 }, from_clipboard: null,
        }]);
    });

    it('is disabled by the config flag', () => {
        const rig = makeRig();
        rig.session.config.freeTextNotes = false;
        rig.controller.promptText = () => 'nope';
        rig.controller.doubleClick({ x: 420, y: 330 });
        expect(rig.submitted()).toEqual([]);
    });
});

describe('replica discipline', () => {
    it('the replica changes only when broadcasts arrive, not on submit', () => {
        const rig = makeRig();
        const slot = rig.controller.clipboardItemRect(1);
        drag(rig, { x: slot.x + 5, y: slot.y + 5 }, { x: 300, y: 200 });
        expect(rig.session.replica.notes.size).toBe(0); // optimistic only
        rig.echoPending();
        expect(rig.session.replica.notes.size).toBe(1);
        expect(rig.session.pending.size).toBe(0); // preview discarded on echo
    });

    it('a rejection discards the preview and posts a notice', () => {
        const rig = makeRig();
        const note = rig.serverApply({ kind: 'create_note', text: 'n', color: 0, position: { x: 0, y: 300 }, from_clipboard: null });
        drag(rig, { x: 0, y: 300 }, { x: 100, y: 300 });
        const op = (rig.sent.find((m) => m.type === 'submit_op') as SubmitOpMsg).op;
        rig.session.handleServer({
            type: 'op_rejected', client_id: op.client_id, client_seq: op.client_seq, reason: 'unknown_target',
        });
        expect(rig.session.pending.size).toBe(0);
        expect(rig.session.activeNotices().length).toBeGreaterThan(0);
    });
});

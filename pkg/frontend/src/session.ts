// UI session: the replica (a fold of server broadcasts), in-flight
// previews, presence roster, scoreboard, and notices. The replica mutates
// only on op_broadcast; previews are a render-layer overlay discarded on
// echo or rejection.

import { docToState } from './canonical.js';
import { Operation, Payload, WorkspaceState, applyOp, emptyState, makeOp } from './model.js';
import {
    ClientMessage, PresenceEntryWire, ScoreboardWire, ServerMessage,
} from './protocol.js';

export interface SessionConfig {
    freeTextNotes: boolean;   // double-click on empty canvas creates a note
    clonesOnTextEdit: boolean; // also show clone indicators while editing text
}

export const DEFAULT_CONFIG: SessionConfig = { freeTextNotes: true, clonesOnTextEdit: false };

export interface Notice {
    text: string;
    until: number; // ms timestamp
}

export type CueKind = 'create' | 'link' | 'delete' | 'score' | 'leadership' | 'reject';

export class UiSession {
    userId: string | null = null;
    color = 0;
    replica: WorkspaceState = emptyState();
    roster: PresenceEntryWire[] = [];
    scoreboard: ScoreboardWire | null = null;
    badgeHolder: string | null = null;
    notices: Notice[] = [];
    pending = new Map<string, Operation>();
    clientSeq = 0;
    connected = false;
    config: SessionConfig;

    onChange: () => void = () => {};
    onCue: (kind: CueKind) => void = () => {};
    sendMessage: (msg: ClientMessage) => void = () => {};
    now: () => number = () => Date.now();

    constructor(config: SessionConfig = DEFAULT_CONFIG) {
        this.config = config;
    }

    submit(payload: Payload): Operation {
        if (!this.userId) throw new Error('not joined yet');
        this.clientSeq += 1;
        const op = makeOp(this.userId, this.clientSeq, payload);
        this.pending.set(`${op.client_id}:${op.client_seq}`, op);
        this.sendMessage({ type: 'submit_op', op });
        return op;
    }

    setSpeaking(on: boolean): void {
        this.sendMessage({ type: 'speaking', on });
    }

    notice(text: string): void {
        this.notices.push({ text, until: this.now() + 2500 });
        this.onChange();
    }

    activeNotices(): Notice[] {
        const t = this.now();
        this.notices = this.notices.filter((n) => n.until > t);
        return this.notices;
    }

    userColors(): Map<string, number> {
        const colors = new Map<string, number>();
        for (const p of this.roster) colors.set(p.user, p.color);
        if (this.userId !== null && !colors.has(this.userId)) colors.set(this.userId, this.color);
        return colors;
    }

    userNames(): Map<string, string> {
        const names = new Map<string, string>();
        for (const p of this.roster) names.set(p.user, p.name);
        return names;
    }

    handleServer(msg: ServerMessage): void {
        switch (msg.type) {
            case 'welcome': {
                this.userId = msg.your_user_id;
                this.color = msg.assigned_color;
                this.clientSeq = 0;
                this.pending.clear();
                this.scoreboard = msg.scoreboard;
                this.badgeHolder = msg.scoreboard.badge_holder;
                if (msg.snapshot !== null) {
                    this.replica = docToState(msg.snapshot);
                    this.replica.clipboard = msg.clipboard.map((c) => ({ ...c }));
                }
                // On a resume welcome the replica is kept; the missing ops
                // arrive as ordinary broadcasts right after this message.
                this.connected = true;
                break;
            }
            case 'op_broadcast': {
                const op = msg.op;
                if (op.server_seq === this.replica.appliedSeq + 1) {
                    applyOp(this.replica, op);
                    this.pending.delete(`${op.client_id}:${op.client_seq}`);
                    this.cueFor(op.payload.kind as string);
                }
                break;
            }
            case 'op_accepted':
                break; // the echo broadcast resolves the preview
            case 'op_rejected': {
                this.pending.delete(`${msg.client_id}:${msg.client_seq}`);
                this.notice(`edit rejected: ${msg.reason.replace(/_/g, ' ')}`);
                this.onCue('reject');
                break;
            }
            case 'presence':
                this.roster = msg.users;
                break;
            case 'score_update':
                this.scoreboard = msg.scoreboard;
                this.onCue('score');
                break;
            case 'badge_change':
                this.badgeHolder = msg.holder;
                this.onCue('leadership');
                break;
            case 'pong':
            case 'error':
                break;
        }
        this.onChange();
    }

    private cueFor(kind: string): void {
        if (kind === 'create_note' || kind === 'attach_label' || kind === 'create_panel') this.onCue('create');
        else if (kind === 'create_link') this.onCue('link');
        else if (kind === 'delete_note' || kind === 'delete_link' || kind === 'detach_label' || kind === 'delete_panel') this.onCue('delete');
    }

    // Preview accessors for the renderer -----------------------------------

    previewPosition(noteId: string): { x: number; y: number } | null {
        for (const op of this.pending.values()) {
            const p = op.payload as any;
            if (p.kind === 'move_note' && p.note === noteId) return p.position;
        }
        return null;
    }

    previewGroupDelta(): { x: number; y: number } | null {
        for (const op of this.pending.values()) {
            const p = op.payload as any;
            if (p.kind === 'move_group') return p.delta;
        }
        return null;
    }
}

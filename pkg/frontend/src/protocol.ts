// Wire message types exchanged with the server (see docs/protocol.md).

import { RectV, Vec2 } from './geometry.js';
import { Operation } from './model.js';

export interface HelloMsg {
    type: 'hello';
    room: string;
    name: string;
    resume_from_seq: number | null;
}

export interface SubmitOpMsg {
    type: 'submit_op';
    op: Operation;
}

export interface PresenceMsg {
    type: 'presence';
    cursor: Vec2;
    viewport: RectV;
    holding: string | null;
}

export interface SpeakingMsg {
    type: 'speaking';
    on: boolean;
}

export interface PingMsg {
    type: 'ping';
}

export type ClientMessage = HelloMsg | SubmitOpMsg | PresenceMsg | SpeakingMsg | PingMsg;

export interface UserScoreWire {
    cooperation: number;
    speaking_ms: number;
    artifacts_created: number;
    active_ms: number;
    action_efficiency: number;
    discussion_efficiency: number;
}

export interface ScoreboardWire {
    session_start: number;
    badge_holder: string | null;
    users: Record<string, UserScoreWire>;
}

export interface PresenceEntryWire {
    user: string;
    name: string;
    color: number;
    cursor: Vec2;
    viewport: RectV;
    holding: string | null;
    speaking: boolean;
    last_heard: number;
}

export interface WelcomeMsg {
    type: 'welcome';
    your_user_id: string;
    assigned_color: number;
    snapshot: Record<string, unknown> | null;
    resume_from_seq: number | null;
    clipboard: Array<{ id: string; text: string; kind: 'note' | 'label' }>;
    scoreboard: ScoreboardWire;
}

export interface OpAcceptedMsg {
    type: 'op_accepted';
    client_id: string;
    client_seq: number;
    server_seq: number;
}

export interface OpRejectedMsg {
    type: 'op_rejected';
    client_id: string;
    client_seq: number;
    reason: string;
}

export interface OpBroadcastMsg {
    type: 'op_broadcast';
    op: Operation;
}

export interface PresenceBroadcastMsg {
    type: 'presence';
    users: PresenceEntryWire[];
}

export interface ScoreUpdateMsg {
    type: 'score_update';
    scoreboard: ScoreboardWire;
}

export interface BadgeChangeMsg {
    type: 'badge_change';
    holder: string | null;
}

export interface PongMsg {
    type: 'pong';
}

export interface ErrorMsg {
    type: 'error';
    message: string;
}

export type ServerMessage =
    | WelcomeMsg
    | OpAcceptedMsg
    | OpRejectedMsg
    | OpBroadcastMsg
    | PresenceBroadcastMsg
    | ScoreUpdateMsg
    | BadgeChangeMsg
    | PongMsg
    | ErrorMsg;

// Bar-chart model for the gamification board: one group per measure,
// bars normalized to the current maximum.

import { ScoreboardWire } from './protocol.js';

export interface Bar {
    user: string;
    value: number;
    length: number; // 0..1, normalized to the group maximum
    color: number;
}

export interface BarGroup {
    measure: string;
    bars: Bar[];
}

export const MEASURES: Array<[string, keyof import('./protocol.js').UserScoreWire]> = [
    ['cooperation', 'cooperation'],
    ['speaking', 'speaking_ms'],
    ['action efficiency', 'action_efficiency'],
    ['discussion efficiency', 'discussion_efficiency'],
];

export function dashboardModel(scoreboard: ScoreboardWire, colors: Map<string, number>): BarGroup[] {
    const users = Object.keys(scoreboard.users);
    return MEASURES.map(([measure, field]) => {
        const values = users.map((u) => scoreboard.users[u][field] as number);
        const top = values.length ? Math.max(...values) : 0;
        return {
            measure,
            bars: users.map((u, i) => ({
                user: u,
                value: values[i],
                length: top > 0 ? values[i] / top : 0,
                color: colors.get(u) ?? 0,
            })),
        };
    });
}

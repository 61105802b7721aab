// Fixed 10-color categorical cycle; chart task colors are always taken
// from the API's task_color_index so overview and detail views agree.
export const TASK_PALETTE = [
  '#E45756', '#4C78A8', '#F58518', '#72B7B2', '#54A24B',
  '#EECA3B', '#B279A2', '#FF9DA6', '#9D755D', '#BAB0AC',
];

export const START_ANNOTATION_COLOR = '#2CA02C'; // start lines are always green
export const END_ANNOTATION_DEFAULT = '#D62728'; // overview end lines, single non-green

export const LINK_PALETTE = ['#2CA02C', '#FF7F0E', '#9467BD', '#17BECF', '#E377C2'];

export function taskColor(index: number): string {
  return TASK_PALETTE[((index % TASK_PALETTE.length) + TASK_PALETTE.length) % TASK_PALETTE.length];
}

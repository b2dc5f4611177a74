export * from './geometry';
export * from './manifest';
export * from './tiles';
export * from './camera';
export * from './lod';
export * from './loader';
export * from './measure';
export * from './panels';
export * from './interact';
export * from './collab';

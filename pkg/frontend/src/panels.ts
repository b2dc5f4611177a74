// Workspace model: four separated panels with their own tabs, a
// hierarchical tree in Layers, and a Properties panel that follows the
// selection. Selection never reshapes the workspace; it only changes what
// Properties displays. The DOM layer binds to this state, it never owns it.

import { ReplicaStore } from './collab';
import { evaluateSeries, SeriesKind, WireSeries } from './measure';

export type PanelId = 'layers' | 'tools' | 'properties' | 'profile';

export interface Rect {
  x: number;
  y: number;
  w: number;
  h: number;
}

export interface PanelFrame {
  id: PanelId;
  title: string;
  tabs: string[];
  activeTab: string;
  rect: Rect;
}

export interface TreeNode {
  id: string;
  label: string;
  kind: 'project' | 'layer' | 'series' | 'baseline';
  children: TreeNode[];
}

export interface PropertyRow {
  name: string;
  value: string;
}

export interface Selection {
  layerId: string;
  seriesId?: string;
}

export const MEASURE_TOOLS: SeriesKind[] = [
  'distance',
  'height',
  'angle',
  'area',
  'volume',
  'profile',
  'polygon',
  'annotation',
];

function defaultFrames(): Record<PanelId, PanelFrame> {
  return {
    layers: {
      id: 'layers',
      title: 'Layers',
      tabs: ['live', 'committed'],
      activeTab: 'live',
      rect: { x: 0, y: 0, w: 280, h: 600 },
    },
    tools: {
      id: 'tools',
      title: 'Tools',
      tabs: ['measure', 'planes'],
      activeTab: 'measure',
      rect: { x: 0, y: 600, w: 280, h: 200 },
    },
    properties: {
      id: 'properties',
      title: 'Properties',
      tabs: ['selection', 'node'],
      activeTab: 'selection',
      rect: { x: 1640, y: 0, w: 280, h: 500 },
    },
    profile: {
      id: 'profile',
      title: 'Profile',
      tabs: ['plot'],
      activeTab: 'plot',
      rect: { x: 280, y: 820, w: 1360, h: 260 },
    },
  };
}

function formatValues(series: WireSeries): string {
  try {
    const evaln = evaluateSeries(series);
    if (evaln.values.length === 0) return '';
    return evaln.values.map((v) => v.toPrecision(9)).join(', ');
  } catch {
    return 'invalid';
  }
}

export class PanelLayout {
  readonly panels: Record<PanelId, PanelFrame> = defaultFrames();
  selection: Selection | null = null;
  propertiesContent: PropertyRow[] = [];

  activateTab(panel: PanelId, tab: string): void {
    const frame = this.panels[panel];
    if (!frame.tabs.includes(tab)) {
      throw new Error(`panel ${panel} has no tab ${tab}`);
    }
    frame.activeTab = tab;
  }

  /** Project -> layer -> series tree for the Layers panel. */
  layersTree(projectId: string, replica: ReplicaStore): TreeNode {
    const layers: TreeNode[] = [];
    for (const lid of [...replica.live.keys()].sort()) {
      const layer = replica.live.get(lid)!;
      layers.push({
        id: lid,
        label: layer.doc.name || lid,
        kind: 'layer',
        children: layer.doc.series.map((s) => ({
          id: s.id,
          label: s.label || `${s.kind} ${s.id.slice(0, 8)}`,
          kind: 'series' as const,
          children: [],
        })),
      });
    }
    for (const entry of replica.baseline) {
      layers.push({
        id: entry.doc.id,
        label: `${entry.doc.name || entry.doc.id} (committed @${entry.seq})`,
        kind: 'baseline',
        children: entry.doc.series.map((s) => ({
          id: s.id,
          label: s.label || `${s.kind} ${s.id.slice(0, 8)}`,
          kind: 'series' as const,
          children: [],
        })),
      });
    }
    return { id: projectId, label: projectId, kind: 'project', children: layers };
  }

  /**
   * Select a series: Properties gets its rows, nothing else moves.
   * Returns the ids of panels whose content changed.
   */
  selectSeries(
    replica: ReplicaStore,
    layerId: string,
    seriesId: string,
  ): PanelId[] {
    const series = replica.findSeries(layerId, seriesId);
    if (!series) {
      throw new Error(`no series ${seriesId} in layer ${layerId}`);
    }
    this.selection = { layerId, seriesId };
    this.propertiesContent = [
      { name: 'kind', value: series.kind },
      { name: 'label', value: series.label },
      { name: 'author', value: series.author },
      { name: 'version', value: String(series.version) },
      { name: 'vertices', value: String(series.vertices.length) },
      { name: 'values', value: formatValues(series) },
    ];
    return ['layers', 'properties'];
  }

  clearSelection(): PanelId[] {
    this.selection = null;
    this.propertiesContent = [];
    return ['layers', 'properties'];
  }
}

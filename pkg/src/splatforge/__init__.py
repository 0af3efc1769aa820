"""splatforge: headless Gaussian-splat scene editing with a generative-job broker.

Subpackages:
  geometry / splats / ply  - splat data model, transforms, PLY interchange
  scene                    - scene graph, edit instructions, JSON log replay
  render                   - CPU color+depth renderer for splats/primitives
  backends                 - generative backend contract: mocks + HTTP adapter
  broker                   - job orchestration and proxy lifecycle
  server                   - HTTP + event-stream facade
  cli                      - headless entry points
"""

__version__ = "0.1.0"

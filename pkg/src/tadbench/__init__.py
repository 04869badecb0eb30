"""tadbench: a benchmark toolkit for embedding-based text anomaly detection.

The pieces, bottom to top:

- ``tadbench.data``: label rules, the TADB embedding file format,
  performance-matrix CSVs, and the shipped AUROC fixtures.
- ``tadbench.pooling``: token-matrix to sentence-vector reduction.
- ``tadbench.detectors``: unsupervised detector zoo behind one fit/score
  contract (higher score = more anomalous).
- ``tadbench.metrics``: AUROC/AUPRC, MAPE, and rank statistics.
- ``tadbench.perfmatrix``: singular-spectrum analysis, MCAR masking, and
  low-rank completion of performance matrices.
- ``tadbench.embed_client``: HTTP client for embedding services.
- ``tadbench.bench``: the detectors × embeddings grid runner.
- ``tadbench.cli``: the ``tadbench`` command-line entry point.
"""

__version__ = "0.1.0"

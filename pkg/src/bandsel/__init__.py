"""Band-selection toolkit for multiband deforestation scenes.

Pipeline: ingest multiband rasters, reduce to a 3-plane false-color image
with PCA, segment it into superpixels, filter and label the segments against
a ground-truth mask, extract per-band Haralick texture features, search the
band-subset space with UMDA under an SVM balanced-accuracy fitness, and
export the winning band composition as a tiled segmentation dataset.
"""

__version__ = "0.1.0"

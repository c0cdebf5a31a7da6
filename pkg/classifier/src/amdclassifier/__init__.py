"""AMD-vs-normal classification over attention-fused OCTA rasters.

Single-channel ResNet-18 with a focal loss, two-stage warmup/fine-tune
schedule, stratified k-fold cross-validation, and GradCAM export. Consumes
the fused-raster directory layout written by the vesselmark pipeline.
"""

__version__ = "0.1.0"

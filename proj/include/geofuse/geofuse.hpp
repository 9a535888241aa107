#pragma once

// Umbrella header for the geofuse library.

#include "geofuse/ascii_grid.hpp"
#include "geofuse/blur.hpp"
#include "geofuse/class_map.hpp"
#include "geofuse/cooccurrence.hpp"
#include "geofuse/embeddings.hpp"
#include "geofuse/encoder_block.hpp"
#include "geofuse/errors.hpp"
#include "geofuse/fileio.hpp"
#include "geofuse/fusion.hpp"
#include "geofuse/geojson.hpp"
#include "geofuse/geometry.hpp"
#include "geofuse/geotransform.hpp"
#include "geofuse/gft.hpp"
#include "geofuse/grid.hpp"
#include "geofuse/linalg.hpp"
#include "geofuse/location_encoder.hpp"
#include "geofuse/metrics.hpp"
#include "geofuse/parallel.hpp"
#include "geofuse/pipeline_config.hpp"
#include "geofuse/prior.hpp"
#include "geofuse/rasterize.hpp"
#include "geofuse/resample.hpp"
#include "geofuse/ridge.hpp"
#include "geofuse/splitmix.hpp"
#include "geofuse/subset.hpp"
#include "geofuse/tokens.hpp"

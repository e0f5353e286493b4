#pragma once

#include "bvh.hpp"
#include "coord_map.hpp"
#include "error.hpp"
#include "geometry.hpp"
#include "grid.hpp"
#include "kdtree.hpp"
#include "material.hpp"
#include "mesh.hpp"
#include "metrics.hpp"
#include "parallel.hpp"
#include "qef.hpp"
#include "resample.hpp"
#include "surfacer.hpp"
#include "texture.hpp"
#include "vec.hpp"
#include "voxelizer.hpp"

#pragma once

#include "fpx/basis.hpp"
#include "fpx/bounds.hpp"
#include "fpx/engine.hpp"
#include "fpx/error.hpp"
#include "fpx/fields.hpp"
#include "fpx/generators.hpp"
#include "fpx/geometry.hpp"
#include "fpx/invmap.hpp"
#include "fpx/mesh.hpp"
#include "fpx/mesh_io.hpp"
#include "fpx/particles.hpp"
#include "fpx/spatial_hash.hpp"
#include "fpx/transport.hpp"

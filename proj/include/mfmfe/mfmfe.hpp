#pragma once

#include "mfmfe/core.hpp"
#include "mfmfe/reference.hpp"
#include "mfmfe/refmap.hpp"
#include "mfmfe/gauss.hpp"
#include "mfmfe/mesh.hpp"
#include "mfmfe/mesh_generators.hpp"
#include "mfmfe/basis.hpp"
#include "mfmfe/dofmap.hpp"
#include "mfmfe/quadrature.hpp"
#include "mfmfe/projection.hpp"
#include "mfmfe/physics.hpp"
#include "mfmfe/random_field.hpp"
#include "mfmfe/assembly.hpp"
#include "mfmfe/newton.hpp"
#include "mfmfe/verification.hpp"
#include "mfmfe/io.hpp"

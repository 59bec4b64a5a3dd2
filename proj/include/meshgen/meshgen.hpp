#pragma once

#include <meshgen/error.hpp>
#include <meshgen/fvsolve.hpp>
#include <meshgen/geometry.hpp>
#include <meshgen/multiblock.hpp>
#include <meshgen/projectors.hpp>
#include <meshgen/scene.hpp>
#include <meshgen/surfaces.hpp>
#include <meshgen/tfi.hpp>
#include <meshgen/vec3.hpp>
#include <meshgen/vtk.hpp>

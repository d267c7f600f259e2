#pragma once

#include <aggfem/config.hpp>
#include <aggfem/diffusion_law.hpp>
#include <aggfem/energy.hpp>
#include <aggfem/fe_space.hpp>
#include <aggfem/geometry.hpp>
#include <aggfem/io.hpp>
#include <aggfem/kernel.hpp>
#include <aggfem/mesh.hpp>
#include <aggfem/nonlocal.hpp>
#include <aggfem/parallel.hpp>
#include <aggfem/self_check.hpp>
#include <aggfem/solver.hpp>

#pragma once

#include "phnn/adam.hpp"
#include "phnn/bound.hpp"
#include "phnn/composition.hpp"
#include "phnn/coupling.hpp"
#include "phnn/coupling_learning.hpp"
#include "phnn/dataset.hpp"
#include "phnn/error.hpp"
#include "phnn/finite_difference.hpp"
#include "phnn/forcing.hpp"
#include "phnn/io.hpp"
#include "phnn/linalg.hpp"
#include "phnn/mlp.hpp"
#include "phnn/model.hpp"
#include "phnn/ode.hpp"
#include "phnn/parameters.hpp"
#include "phnn/rng.hpp"
#include "phnn/rollout.hpp"
#include "phnn/systems.hpp"
#include "phnn/training.hpp"

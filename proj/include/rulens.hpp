#pragma once

#include "rulens/analysis.hpp"
#include "rulens/cv.hpp"
#include "rulens/dataset.hpp"
#include "rulens/error.hpp"
#include "rulens/loss.hpp"
#include "rulens/model.hpp"
#include "rulens/random.hpp"
#include "rulens/rule.hpp"
#include "rulens/rulegen.hpp"
#include "rulens/serialize.hpp"
#include "rulens/solvers.hpp"
#include "rulens/tree.hpp"

#pragma once

#include "crn/errors.hpp"
#include "crn/rational.hpp"
#include "crn/field.hpp"
#include "crn/network.hpp"
#include "crn/equilibrium.hpp"
#include "crn/local_analysis.hpp"
#include "crn/families.hpp"
#include "crn/global_analysis.hpp"
#include "crn/dynamics.hpp"
#include "crn/report.hpp"

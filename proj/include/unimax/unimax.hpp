#pragma once

#include "unimax/certifier.hpp"
#include "unimax/config.hpp"
#include "unimax/domain.hpp"
#include "unimax/errors.hpp"
#include "unimax/family.hpp"
#include "unimax/gdelta.hpp"
#include "unimax/geometry.hpp"
#include "unimax/prober.hpp"
#include "unimax/report.hpp"
#include "unimax/svg.hpp"

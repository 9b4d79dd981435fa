#pragma once

#include "ocrd/region/binary.hpp"
#include "ocrd/region/gaussian.hpp"
#include "ocrd/region/i0.hpp"
#include "ocrd/region/mmi.hpp"
#include "ocrd/region/types.hpp"
#include "ocrd/region/variations.hpp"

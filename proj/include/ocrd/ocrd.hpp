#pragma once

#include "ocrd/codesim.hpp"
#include "ocrd/error.hpp"
#include "ocrd/info.hpp"
#include "ocrd/region.hpp"
#include "ocrd/rng.hpp"
#include "ocrd/transport.hpp"

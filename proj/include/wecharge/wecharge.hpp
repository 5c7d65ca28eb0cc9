#ifndef WECHARGE_WECHARGE_HPP
#define WECHARGE_WECHARGE_HPP

#include "wecharge/availability.hpp"
#include "wecharge/catalog.hpp"
#include "wecharge/core_model.hpp"
#include "wecharge/error.hpp"
#include "wecharge/fixture.hpp"
#include "wecharge/matching.hpp"
#include "wecharge/registry.hpp"
#include "wecharge/reservation.hpp"
#include "wecharge/serialization.hpp"
#include "wecharge/service.hpp"

#endif

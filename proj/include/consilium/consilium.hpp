#pragma once

#include "consilium/error.hpp"
#include "consilium/model.hpp"
#include "consilium/scoring.hpp"
#include "consilium/voting.hpp"
#include "consilium/session.hpp"
#include "consilium/service.hpp"
#include "consilium/demo.hpp"
